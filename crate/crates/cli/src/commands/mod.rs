pub mod correlate;
pub mod evolve;
pub mod sample;
pub mod verify;

use crate::CliError;
use hel_core::specfun::Order;

/// Validate the order parameter with a message naming the constraint.
pub fn parse_alpha(alpha: f64) -> Result<Order, CliError> {
    Order::new(alpha).map_err(|_| {
        CliError::Usage(format!(
            "--alpha {alpha} is invalid: the hard-edge family requires alpha > -1"
        ))
    })
}

pub fn ensure_out_dir(path: &std::path::Path) -> Result<(), CliError> {
    std::fs::create_dir_all(path)
        .map_err(|e| CliError::Runtime(format!("cannot create {}: {e}", path.display())))
}
