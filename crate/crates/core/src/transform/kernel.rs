use serde::{Deserialize, Serialize};

pub const KERNEL_LENGTH: usize = 9;
/// C(9, 3): every placement of three weights equal to 2.
pub const NUM_KERNELS: usize = 84;

/// A length-9 kernel with weight 2 at three positions and -1 elsewhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct Kernel {
    positions: [usize; 3],
}

impl Kernel {
    /// Kernel with 2s at the given strictly increasing positions.
    pub fn new(positions: [usize; 3]) -> Option<Self> {
        let ok = positions[0] < positions[1] && positions[1] < positions[2] && positions[2] < KERNEL_LENGTH;
        ok.then_some(Self { positions })
    }

    pub fn positions(&self) -> [usize; 3] {
        self.positions
    }

    pub fn weights(&self) -> [f64; KERNEL_LENGTH] {
        let mut w = [-1.0; KERNEL_LENGTH];
        for &p in &self.positions {
            w[p] = 2.0;
        }
        w
    }

    /// The 84 kernels, in lexicographic order of their 2-positions.
    pub fn all() -> Vec<Kernel> {
        let mut out = Vec::with_capacity(NUM_KERNELS);
        for a in 0..KERNEL_LENGTH {
            for b in a + 1..KERNEL_LENGTH {
                for c in b + 1..KERNEL_LENGTH {
                    out.push(Kernel { positions: [a, b, c] });
                }
            }
        }
        out
    }
}
