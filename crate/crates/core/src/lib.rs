pub mod criteria;
pub mod exec;
pub mod expr;
pub mod front;
pub mod jets;
pub mod linalg;
pub mod oracle;
pub mod scalar;
pub mod singular;
