//! Dense exponent vectors under graded lexicographic order.

use std::cmp::Ordering;
use std::fmt;

/// A monomial `x1^e1 * ... * xn^en` with its total degree cached.
#[derive(Clone, Debug, PartialEq, Eq, Hash)]
pub struct Monomial {
    exps: Vec<u16>,
    degree: u32,
}

impl Monomial {
    pub fn new(exps: Vec<u16>) -> Monomial {
        let degree = exps.iter().map(|&e| e as u32).sum();
        Monomial { exps, degree }
    }

    pub fn one(nvars: usize) -> Monomial {
        Monomial {
            exps: vec![0; nvars],
            degree: 0,
        }
    }

    /// The variable `x_{i+1}` (zero-based index `i`).
    pub fn var(nvars: usize, i: usize) -> Monomial {
        let mut exps = vec![0; nvars];
        exps[i] = 1;
        Monomial { exps, degree: 1 }
    }

    pub fn exps(&self) -> &[u16] {
        &self.exps
    }

    pub fn nvars(&self) -> usize {
        self.exps.len()
    }

    pub fn degree(&self) -> u32 {
        self.degree
    }

    pub fn exp(&self, i: usize) -> u16 {
        self.exps[i]
    }

    pub fn mul(&self, other: &Monomial) -> Monomial {
        debug_assert_eq!(self.nvars(), other.nvars());
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| a + b).collect(),
            degree: self.degree + other.degree,
        }
    }

    pub fn divides(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| a <= b)
    }

    /// `other / self`, assuming `self` divides `other`.
    pub fn quotient(&self, other: &Monomial) -> Monomial {
        Monomial {
            exps: self.exps.iter().zip(&other.exps).map(|(a, b)| b - a).collect(),
            degree: other.degree - self.degree,
        }
    }

    pub fn lcm(&self, other: &Monomial) -> Monomial {
        Monomial::new(self.exps.iter().zip(&other.exps).map(|(a, b)| *a.max(b)).collect())
    }

    pub fn is_coprime(&self, other: &Monomial) -> bool {
        self.exps.iter().zip(&other.exps).all(|(a, b)| *a == 0 || *b == 0)
    }

    /// Indices of the variables that occur.
    pub fn support(&self) -> Vec<usize> {
        (0..self.exps.len()).filter(|&i| self.exps[i] > 0).collect()
    }

    /// Same monomial viewed in a ring with `nvars` variables (padding or truncating zeros).
    pub fn resize(&self, nvars: usize) -> Monomial {
        let mut exps = self.exps.clone();
        debug_assert!(exps.iter().skip(nvars).all(|&e| e == 0));
        exps.resize(nvars, 0);
        Monomial {
            exps,
            degree: self.degree,
        }
    }
}

impl Ord for Monomial {
    fn cmp(&self, other: &Self) -> Ordering {
        self.degree.cmp(&other.degree).then_with(|| self.exps.cmp(&other.exps))
    }
}

impl PartialOrd for Monomial {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl fmt::Display for Monomial {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &e) in self.exps.iter().enumerate() {
            if e == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if e == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, e)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// All monomials of total degree `d` in `n` variables, largest first.
pub fn monomials_of_degree(n: usize, d: u32) -> Vec<Monomial> {
    let mut out = Vec::new();
    let mut cur = vec![0u16; n];
    fill(&mut cur, 0, d, &mut out);
    out
}

fn fill(cur: &mut Vec<u16>, pos: usize, left: u32, out: &mut Vec<Monomial>) {
    let n = cur.len();
    if n == 0 {
        if left == 0 {
            out.push(Monomial::new(Vec::new()));
        }
        return;
    }
    if pos == n - 1 {
        cur[pos] = left as u16;
        out.push(Monomial::new(cur.clone()));
        cur[pos] = 0;
        return;
    }
    for e in (0..=left).rev() {
        cur[pos] = e as u16;
        fill(cur, pos + 1, left - e, out);
    }
    cur[pos] = 0;
}

/// Number of monomials of degree `d` in `n` variables.
pub fn count_monomials(n: usize, d: u32) -> usize {
    if n == 0 {
        return usize::from(d == 0);
    }
    binomial(n as u64 + d as u64 - 1, d as u64) as usize
}

pub fn binomial(n: u64, k: u64) -> u64 {
    if k > n {
        return 0;
    }
    let k = k.min(n - k);
    let mut acc = 1u64;
    for i in 0..k {
        acc = acc * (n - i) / (i + 1);
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn grlex_orders_by_degree_then_lex() {
        let a = Monomial::new(vec![0, 0, 2]);
        let b = Monomial::new(vec![1, 0, 0]);
        let c = Monomial::new(vec![0, 1, 1]);
        let d = Monomial::new(vec![1, 0, 1]);
        assert!(a > b);
        assert!(d > c);
        assert!(c > a);
    }

    #[test]
    fn enumeration_is_descending_and_complete() {
        let ms = monomials_of_degree(3, 3);
        assert_eq!(ms.len(), count_monomials(3, 3));
        assert!(ms.windows(2).all(|w| w[0] > w[1]));
        assert_eq!(ms[0].exps(), &[3, 0, 0]);
        assert_eq!(ms.last().unwrap().exps(), &[0, 0, 3]);
    }

    #[test]
    fn division_and_lcm() {
        let a = Monomial::new(vec![1, 2, 0]);
        let b = Monomial::new(vec![2, 2, 1]);
        assert!(a.divides(&b));
        assert_eq!(a.mul(&a.quotient(&b)), b);
        assert_eq!(a.lcm(&Monomial::new(vec![0, 3, 1])).exps(), &[1, 3, 1]);
    }

    #[test]
    fn display() {
        assert_eq!(Monomial::new(vec![2, 0, 1]).to_string(), "x1^2*x3");
        assert_eq!(Monomial::one(2).to_string(), "1");
    }
}
