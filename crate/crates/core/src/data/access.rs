use std::fmt;

/// How a kernel uses one of its arguments.
///
/// Dats accept `Read`, `Write`, `Rw` and `Inc`; Globals accept `Read`, `Sum`,
/// `Min` and `Max`; Mats accept only `Write` and `Inc`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Access {
    Read,
    Write,
    Rw,
    Inc,
    Sum,
    Min,
    Max,
}

impl Access {
    /// Whether the argument's values are gathered before the kernel runs.
    pub fn reads(self) -> bool {
        matches!(self, Access::Read | Access::Rw)
    }

    /// Whether the argument is modified by the loop.
    pub fn modifies(self) -> bool {
        !matches!(self, Access::Read)
    }

    pub fn is_reduction(self) -> bool {
        matches!(self, Access::Sum | Access::Min | Access::Max)
    }

    /// Identity element used to initialise reduction partials.
    pub fn identity(self) -> f64 {
        match self {
            Access::Min => f64::INFINITY,
            Access::Max => f64::NEG_INFINITY,
            _ => 0.0,
        }
    }

    /// Combine an accumulated value with a new contribution.
    #[inline]
    pub fn combine(self, acc: f64, x: f64) -> f64 {
        match self {
            Access::Min => acc.min(x),
            Access::Max => acc.max(x),
            _ => acc + x,
        }
    }
}

impl fmt::Display for Access {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            Access::Read => "READ",
            Access::Write => "WRITE",
            Access::Rw => "RW",
            Access::Inc => "INC",
            Access::Sum => "SUM",
            Access::Min => "MIN",
            Access::Max => "MAX",
        };
        f.write_str(s)
    }
}
