use core::ops::{Add, AddAssign, Sub};

/// How many sequential page reads cost as much as one random read.
pub const SEQUENTIAL_PER_RANDOM: u64 = 20;

/// Page reads charged to a query, split by access pattern.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct IoStats {
    pub sequential_pages: u64,
    pub random_pages: u64,
}

impl IoStats {
    /// Cost in random-read equivalents: `random + ceil(sequential / 20)`.
    pub fn weighted_cost(&self) -> u64 {
        self.random_pages + self.sequential_pages.div_ceil(SEQUENTIAL_PER_RANDOM)
    }

    pub fn total_pages(&self) -> u64 {
        self.random_pages + self.sequential_pages
    }
}

impl Add for IoStats {
    type Output = IoStats;

    fn add(self, rhs: IoStats) -> IoStats {
        IoStats {
            sequential_pages: self.sequential_pages + rhs.sequential_pages,
            random_pages: self.random_pages + rhs.random_pages,
        }
    }
}

impl AddAssign for IoStats {
    fn add_assign(&mut self, rhs: IoStats) {
        *self = *self + rhs;
    }
}

impl Sub for IoStats {
    type Output = IoStats;

    fn sub(self, rhs: IoStats) -> IoStats {
        IoStats {
            sequential_pages: self.sequential_pages.saturating_sub(rhs.sequential_pages),
            random_pages: self.random_pages.saturating_sub(rhs.random_pages),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn twenty_sequential_cost_one_random() {
        let s = IoStats {
            sequential_pages: 20,
            random_pages: 0,
        };
        assert_eq!(s.weighted_cost(), 1);
        let s = IoStats {
            sequential_pages: 21,
            random_pages: 3,
        };
        assert_eq!(s.weighted_cost(), 5);
        assert_eq!(IoStats::default().weighted_cost(), 0);
    }

    #[test]
    fn counts_add_componentwise() {
        let a = IoStats {
            sequential_pages: 7,
            random_pages: 2,
        };
        let b = IoStats {
            sequential_pages: 15,
            random_pages: 1,
        };
        let c = a + b;
        assert_eq!(
            c,
            IoStats {
                sequential_pages: 22,
                random_pages: 3
            }
        );
        assert_eq!(c - b, a);
        assert!(c.weighted_cost() <= a.weighted_cost() + b.weighted_cost());
    }
}
