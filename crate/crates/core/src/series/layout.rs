use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex, OnceLock};

/// Exponent vector of a monomial in the spatial variables.
#[derive(Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Debug, Default)]
pub struct Exponent(pub Vec<u32>);

impl Exponent {
    pub fn zero(n: usize) -> Self {
        Exponent(vec![0; n])
    }

    pub fn unit(n: usize, i: usize) -> Self {
        let mut e = vec![0; n];
        e[i] = 1;
        Exponent(e)
    }

    pub fn degree(&self) -> u32 {
        self.0.iter().sum()
    }

    pub fn len(&self) -> usize {
        self.0.len()
    }

    pub fn is_empty(&self) -> bool {
        self.0.is_empty()
    }

    pub fn powers(&self) -> &[u32] {
        &self.0
    }
}

impl fmt::Display for Exponent {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let mut first = true;
        for (i, &p) in self.0.iter().enumerate() {
            if p == 0 {
                continue;
            }
            if !first {
                write!(f, "*")?;
            }
            first = false;
            if p == 1 {
                write!(f, "x{}", i + 1)?;
            } else {
                write!(f, "x{}^{}", i + 1, p)?;
            }
        }
        if first {
            write!(f, "1")?;
        }
        Ok(())
    }
}

/// Monomial ordering and precomputed product/derivative tables for one `(n, D)` pair.
///
/// Monomials are stored in graded order, so the monomials of total degree
/// `<= d` always form a prefix of length `count(d)`.
pub struct Layout {
    n: usize,
    max_degree: u32,
    exponents: Vec<Exponent>,
    degrees: Vec<u32>,
    prefix: Vec<usize>,
    index: HashMap<Exponent, usize>,
    mul_rows: Vec<Vec<u32>>,
    // per variable: (source index, target index, factor)
    deriv: Vec<Vec<(usize, usize, u32)>>,
}

impl Layout {
    /// Shared layout for `n` variables truncated at total degree `max_degree`.
    pub fn shared(n: usize, max_degree: u32) -> Arc<Layout> {
        static CACHE: OnceLock<Mutex<HashMap<(usize, u32), Arc<Layout>>>> = OnceLock::new();
        let cache = CACHE.get_or_init(|| Mutex::new(HashMap::new()));
        let mut guard = cache.lock().expect("layout cache poisoned");
        guard
            .entry((n, max_degree))
            .or_insert_with(|| Arc::new(Layout::build(n, max_degree)))
            .clone()
    }

    fn build(n: usize, max_degree: u32) -> Layout {
        let mut exponents = Vec::new();
        let mut prefix = Vec::with_capacity(max_degree as usize + 1);
        for d in 0..=max_degree {
            compositions(n, d, &mut Vec::with_capacity(n), &mut exponents);
            prefix.push(exponents.len());
        }
        let degrees: Vec<u32> = exponents.iter().map(Exponent::degree).collect();
        let index: HashMap<Exponent, usize> =
            exponents.iter().cloned().enumerate().map(|(i, e)| (e, i)).collect();

        let mut mul_rows = Vec::with_capacity(exponents.len());
        for (i, ei) in exponents.iter().enumerate() {
            let room = max_degree - degrees[i];
            let lim = prefix[room as usize];
            let row: Vec<u32> = exponents[..lim]
                .iter()
                .map(|ej| {
                    let sum = Exponent(ei.0.iter().zip(&ej.0).map(|(a, b)| a + b).collect());
                    index[&sum] as u32
                })
                .collect();
            mul_rows.push(row);
        }

        let deriv = (0..n)
            .map(|var| {
                exponents
                    .iter()
                    .enumerate()
                    .filter(|(_, e)| e.0[var] > 0)
                    .map(|(k, e)| {
                        let mut lower = e.clone();
                        lower.0[var] -= 1;
                        (k, index[&lower], e.0[var])
                    })
                    .collect()
            })
            .collect();

        Layout {
            n,
            max_degree,
            exponents,
            degrees,
            prefix,
            index,
            mul_rows,
            deriv,
        }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn max_degree(&self) -> u32 {
        self.max_degree
    }

    /// Number of monomials of total degree `<= d`; zero for negative `d`.
    pub fn count(&self, d: i32) -> usize {
        if d < 0 {
            0
        } else {
            self.prefix[(d as u32).min(self.max_degree) as usize]
        }
    }

    pub fn len(&self) -> usize {
        self.exponents.len()
    }

    pub fn is_empty(&self) -> bool {
        self.exponents.is_empty()
    }

    pub fn exponent(&self, k: usize) -> &Exponent {
        &self.exponents[k]
    }

    pub fn degree(&self, k: usize) -> u32 {
        self.degrees[k]
    }

    pub fn index_of(&self, e: &Exponent) -> Option<usize> {
        self.index.get(e).copied()
    }

    /// Indices of `e_i + e_j` for every `j` that keeps the sum within `max_degree`.
    pub(crate) fn mul_row(&self, i: usize) -> &[u32] {
        &self.mul_rows[i]
    }

    pub(crate) fn deriv_table(&self, var: usize) -> &[(usize, usize, u32)] {
        &self.deriv[var]
    }
}

fn compositions(n: usize, d: u32, current: &mut Vec<u32>, out: &mut Vec<Exponent>) {
    if n == 0 {
        if d == 0 {
            out.push(Exponent(Vec::new()));
        }
        return;
    }
    if current.len() == n - 1 {
        current.push(d);
        out.push(Exponent(current.clone()));
        current.pop();
        return;
    }
    for first in (0..=d).rev() {
        current.push(first);
        compositions(n, d - first, current, out);
        current.pop();
    }
}
