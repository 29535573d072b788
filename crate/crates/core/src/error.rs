use alloc::string::String;

/// Errors produced by the simulator and learning engine.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("invalid input: {0}")]
    InvalidInput(String),
    #[error("joint action space of {required} vectors exceeds the budget of {budget}")]
    BudgetExceeded { required: u128, budget: u64 },
}

pub type Result<T> = core::result::Result<T, Error>;

pub(crate) fn invalid<T>(msg: impl Into<String>) -> Result<T> {
    Err(Error::InvalidInput(msg.into()))
}
