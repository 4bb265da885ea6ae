pub mod family;
pub mod ghz_swap;
pub mod simulate;
pub mod table2;
pub mod verify;

/// Rendered output of a command, plus a description of any failed physics
/// check. The body is written even when a check fails.
#[derive(Clone, Debug)]
pub struct CommandOutput {
    pub body: String,
    pub failure: Option<String>,
}
