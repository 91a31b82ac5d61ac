use num_rational::Rational64;

use super::{parse_tableau, PrkTableau};
use crate::error::{Error, Result};

/// Names accepted by [`builtin_tableau`].
pub const BUILTIN_NAMES: [&str; 7] = ["OS1", "TW1", "TW2", "CS2", "SH2", "FE1", "ETR2"];

// Osher-Sanders, one level of refinement.
const OS1: &str = "
2 2
0 0
0 0

0   0
1/2 0

1/2 1/2
1/2 1/2
";

// Tang-Warnecke, forward Euler based.
const TW1: &str = "
2 2
0   0
1/2 0

0   0
1/2 0

1   0
1/2 1/2
";

// Tang-Warnecke, explicit trapezoidal rule based.
const TW2: &str = "
2 4
0   0   0 0
1/2 0   0 0
1/4 1/4 0 0
1   0   0 0

0   0   0   0
1/2 0   0   0
1/4 1/4 0   0
1/4 1/4 1/2 0

1/2 0   0   1/2
1/4 1/4 1/4 1/4
";

// Constantinescu-Sandu.
const CS2: &str = "
2 4
0 0 0 0
1 0 0 0
0 0 0 0
0 0 1 0

0   0   0   0
1/2 0   0   0
1/4 1/4 0   0
1/4 1/4 1/2 0

1/4 1/4 1/4 1/4
1/4 1/4 1/4 1/4
";

// Coarse trapezoidal step everywhere, then two refined steps on the second
// region with Hermite interpolation at the half step.
const SH2: &str = "
2 5
0   0   0 0 0
1   0   0 0 0
3/8 1/8 0 0 0
3/8 1/8 0 0 0
1/2 1/2 0 0 0

0   0 0   0   0
1   0 0   0   0
1/2 0 0   0   0
1/4 0 1/4 0   0
1/4 0 1/4 1/2 0

1/2 1/2 0   0   0
1/4 0   1/4 1/4 1/4
";

const FE1: &str = "
1 1
0
1
";

const ETR2: &str = "
1 2
0 0
1 0
1/2 1/2
";

const RK4: &str = "
1 4
0   0   0 0
1/2 0   0 0
0   1/2 0 0
0   0   1 0
1/6 1/3 1/3 1/6
";

/// Returns one of the built-in schemes by (case-insensitive) name.
///
/// `FE1` and `ETR2` are the single-part forward Euler and explicit
/// trapezoidal methods that the multirate schemes are built from.
pub fn builtin_tableau(name: &str) -> Result<PrkTableau<Rational64>> {
    let text = match name.to_ascii_uppercase().as_str() {
        "OS1" => OS1,
        "TW1" => TW1,
        "TW2" => TW2,
        "CS2" => CS2,
        "SH2" => SH2,
        "FE1" => FE1,
        "ETR2" => ETR2,
        _ => return Err(Error::UnknownScheme(name.to_string())),
    };
    Ok(parse_tableau(text).expect("built-in tableau text is well formed"))
}

/// Classical four-stage, fourth-order method, used for reference solutions.
pub fn classical_rk4() -> PrkTableau<Rational64> {
    parse_tableau(RK4).expect("built-in tableau text is well formed")
}
