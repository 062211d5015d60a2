//! Programs shipped with the crate.

use crate::ir::{parse_program, Program};

/// Client with a window that displays itself and a clock that sets its colour.
pub const CLOCK_HOME: &str = include_str!("../../fixtures/clock_home.mol");
/// The same client against a server where the clock displays the window and
/// `setColor` is free-standing.
pub const CLOCK_WORK: &str = include_str!("../../fixtures/clock_work.mol");
/// Definitely, possibly and not-locally required single-parameter shapes,
/// plus a null-guarded dereference.
pub const PDPPN: &str = include_str!("../../fixtures/pdppn.mol");

pub const ALL: [(&str, &str); 3] = [
    ("clock_home.mol", CLOCK_HOME),
    ("clock_work.mol", CLOCK_WORK),
    ("pdppn.mol", PDPPN),
];

fn parse(src: &str) -> Program {
    parse_program(src).expect("shipped fixtures are valid")
}

pub fn clock_home() -> Program {
    parse(CLOCK_HOME)
}

pub fn clock_work() -> Program {
    parse(CLOCK_WORK)
}

pub fn pdppn() -> Program {
    parse(PDPPN)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixtures_parse() {
        for (name, src) in ALL {
            assert!(parse_program(src).is_ok(), "{name}");
        }
    }
}
