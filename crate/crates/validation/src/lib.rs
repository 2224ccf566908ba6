//! Runner for the acceptance checks: each check yields a verdict and a short
//! measurement summary, printed as one `PASS`/`FAIL` line.

use std::time::{Duration, Instant};

#[derive(Clone, Debug, PartialEq)]
pub struct Outcome {
    pub pass: bool,
    pub detail: String,
}

impl Outcome {
    pub fn new(pass: bool, detail: impl Into<String>) -> Self {
        Outcome {
            pass,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct Line {
    pub id: String,
    pub title: String,
    pub pass: bool,
    pub detail: String,
    pub elapsed: Duration,
    pub budget: Option<Duration>,
}

impl Line {
    pub fn render(&self) -> String {
        let budget = match self.budget {
            Some(b) => format!(" (budget {:.0} s)", b.as_secs_f64()),
            None => String::new(),
        };
        format!(
            "{} {} {}: {}; {:.1} s{}",
            if self.pass { "PASS" } else { "FAIL" },
            self.id,
            self.title,
            self.detail,
            self.elapsed.as_secs_f64(),
            budget
        )
    }
}

/// Time `check`; a run over `budget` fails even when the measurement passes.
/// Panics inside a check are reported as failures.
pub fn run_check(id: &str, title: &str, budget: Option<Duration>, check: impl FnOnce() -> Outcome) -> Line {
    let start = Instant::now();
    let out = std::panic::catch_unwind(std::panic::AssertUnwindSafe(check)).unwrap_or_else(|p| {
        let msg = p
            .downcast_ref::<String>()
            .cloned()
            .or_else(|| p.downcast_ref::<&str>().map(|s| s.to_string()))
            .unwrap_or_default();
        Outcome::new(false, format!("panicked: {msg}"))
    });
    let elapsed = start.elapsed();
    let over = budget.is_some_and(|b| elapsed > b);
    Line {
        id: id.into(),
        title: title.into(),
        pass: out.pass && !over,
        detail: if over { format!("{}; over time budget", out.detail) } else { out.detail },
        elapsed,
        budget,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn budget_and_panic_fail() {
        let ok = run_check("c0", "noop", None, || Outcome::new(true, "x"));
        assert!(ok.pass && ok.render().starts_with("PASS c0 noop: x;"));
        let slow = run_check("c1", "slow", Some(Duration::ZERO), || {
            std::thread::sleep(Duration::from_millis(2));
            Outcome::new(true, "x")
        });
        assert!(!slow.pass && slow.detail.contains("budget"));
        let boom = run_check("c2", "boom", None, || panic!("nope"));
        assert!(!boom.pass && boom.detail.contains("nope"));
    }
}
