//! Second-order forward-mode jets.
//!
//! A [`Jet`] carries a value together with first and diagonal second derivatives
//! with respect to the network inputs. `None` entries are structural zeros; the
//! `d2_mask` bit set restricts second-derivative propagation to the axes a PDE
//! operator actually needs (e.g. no `u_tt` is ever formed for a heat-type
//! residual).

use crate::scalar::Scalar;

#[derive(Debug, Clone)]
pub struct Jet<T> {
    pub v: T,
    d1: Vec<Option<T>>,
    d2: Vec<Option<T>>,
    d2_mask: u8,
}

fn add_opt<T: Scalar>(a: Option<T>, b: Option<T>) -> Option<T> {
    match (a, b) {
        (Some(x), Some(y)) => Some(x + y),
        (Some(x), None) => Some(x),
        (None, Some(y)) => Some(y),
        (None, None) => None,
    }
}

fn mul_opt<T: Scalar>(a: Option<T>, b: T) -> Option<T> {
    a.map(|x| x * b)
}

impl<T: Scalar> Jet<T> {
    /// A quantity with no input dependence (or one whose derivatives are not tracked).
    pub fn constant(v: T, axes: usize) -> Self {
        Jet {
            v,
            d1: vec![None; axes],
            d2: vec![None; axes],
            d2_mask: 0,
        }
    }

    /// Seed for input coordinate `axis`: derivative one with respect to itself,
    /// zero second derivative. `track_second` marks the axis for diagonal
    /// second-derivative propagation downstream.
    pub fn seed(v: T, one: T, axis: usize, axes: usize, track_second: bool) -> Self {
        let mut d1 = vec![None; axes];
        d1[axis] = Some(one);
        Jet {
            v,
            d1,
            d2: vec![None; axes],
            d2_mask: if track_second { 1 << axis } else { 0 },
        }
    }

    /// Jet with explicitly supplied derivative channels (`None` marks a
    /// structural zero). Useful for pushing closed-form solutions through
    /// residual operators without a network.
    pub fn from_parts(v: T, d1: Vec<Option<T>>, d2: Vec<Option<T>>) -> Self {
        assert_eq!(d1.len(), d2.len());
        let mask = d2
            .iter()
            .enumerate()
            .fold(0u8, |m, (i, d)| if d.is_some() { m | (1 << i) } else { m });
        Jet {
            v,
            d1,
            d2,
            d2_mask: mask,
        }
    }

    pub fn axes(&self) -> usize {
        self.d1.len()
    }

    pub fn d1(&self, axis: usize) -> Option<T> {
        self.d1[axis]
    }

    pub fn d2(&self, axis: usize) -> Option<T> {
        self.d2[axis]
    }

    fn raw(v: T, d1: Vec<Option<T>>, d2: Vec<Option<T>>, d2_mask: u8) -> Self {
        Jet { v, d1, d2, d2_mask }
    }

    pub fn add(&self, rhs: &Self) -> Self {
        let d1 = self
            .d1
            .iter()
            .zip(&rhs.d1)
            .map(|(a, b)| add_opt(*a, *b))
            .collect();
        let d2 = self
            .d2
            .iter()
            .zip(&rhs.d2)
            .map(|(a, b)| add_opt(*a, *b))
            .collect();
        Jet::raw(self.v + rhs.v, d1, d2, self.d2_mask | rhs.d2_mask)
    }

    pub fn sub(&self, rhs: &Self) -> Self {
        self.add(&rhs.neg())
    }

    pub fn neg(&self) -> Self {
        let d1 = self.d1.iter().map(|a| a.map(|x| -x)).collect();
        let d2 = self.d2.iter().map(|a| a.map(|x| -x)).collect();
        Jet::raw(-self.v, d1, d2, self.d2_mask)
    }

    pub fn scale(&self, c: f64) -> Self {
        let d1 = self.d1.iter().map(|a| a.map(|x| x.scale(c))).collect();
        let d2 = self.d2.iter().map(|a| a.map(|x| x.scale(c))).collect();
        Jet::raw(self.v.scale(c), d1, d2, self.d2_mask)
    }

    pub fn shift(&self, c: f64) -> Self {
        let mut out = self.clone();
        out.v = out.v.shift(c);
        out
    }

    /// Add a scalar quantity (e.g. a bias parameter) to the value channel.
    pub fn add_value(&self, b: T) -> Self {
        let mut out = self.clone();
        out.v = out.v + b;
        out
    }

    pub fn mul(&self, rhs: &Self) -> Self {
        let mask = self.d2_mask | rhs.d2_mask;
        let axes = self.axes();
        let mut d1 = Vec::with_capacity(axes);
        let mut d2 = Vec::with_capacity(axes);
        for i in 0..axes {
            d1.push(add_opt(
                mul_opt(self.d1[i], rhs.v),
                mul_opt(rhs.d1[i], self.v),
            ));
            if mask & (1 << i) != 0 {
                // (ab)'' = a''b + 2a'b' + ab''
                let cross = match (self.d1[i], rhs.d1[i]) {
                    (Some(x), Some(y)) => Some((x * y).scale(2.0)),
                    _ => None,
                };
                d2.push(add_opt(
                    add_opt(mul_opt(self.d2[i], rhs.v), cross),
                    mul_opt(rhs.d2[i], self.v),
                ));
            } else {
                d2.push(None);
            }
        }
        Jet::raw(self.v * rhs.v, d1, d2, mask)
    }

    pub fn tanh(&self) -> Self {
        let y = self.v.tanh();
        // sech^2 = 1 - tanh^2
        let s = (y * y).scale(-1.0).shift(1.0);
        let axes = self.axes();
        let mut d1 = Vec::with_capacity(axes);
        let mut d2 = Vec::with_capacity(axes);
        // d2 chain: s * v'' - 2 y s (v')^2
        let mut w: Option<T> = None;
        for i in 0..axes {
            d1.push(mul_opt(self.d1[i], s));
            if self.d2_mask & (1 << i) != 0 {
                let curv = match self.d1[i] {
                    Some(g) => {
                        let w = *w.get_or_insert_with(|| (y * s).scale(-2.0));
                        Some(g * g * w)
                    }
                    None => None,
                };
                d2.push(add_opt(mul_opt(self.d2[i], s), curv));
            } else {
                d2.push(None);
            }
        }
        Jet::raw(y, d1, d2, self.d2_mask)
    }

    /// Fused linear combination `sum_i coeffs[i] * jets[i]`, channel by channel.
    /// Coefficients must be input-independent scalars.
    pub fn dot(coeffs: &[T], jets: &[&Jet<T>]) -> Self {
        assert!(!jets.is_empty() && coeffs.len() == jets.len());
        let axes = jets[0].axes();
        let mask = jets.iter().fold(0u8, |m, j| m | j.d2_mask);
        let v = T::dot(
            coeffs,
            &jets.iter().map(|j| j.v).collect::<Vec<_>>(),
        );
        let mut d1 = Vec::with_capacity(axes);
        let mut d2 = Vec::with_capacity(axes);
        let channel = |get: &dyn Fn(&Jet<T>) -> Option<T>| -> Option<T> {
            let mut cs = Vec::with_capacity(coeffs.len());
            let mut vs = Vec::with_capacity(coeffs.len());
            for (c, j) in coeffs.iter().zip(jets) {
                if let Some(x) = get(j) {
                    cs.push(*c);
                    vs.push(x);
                }
            }
            if cs.is_empty() {
                None
            } else {
                Some(T::dot(&cs, &vs))
            }
        };
        for i in 0..axes {
            d1.push(channel(&|j| j.d1[i]));
            d2.push(channel(&|j| j.d2[i]));
        }
        Jet::raw(v, d1, d2, mask)
    }
}
