//! Riemannian data of `a_ij(x)` and the tensors built from a one-form `b_i(x)`.

use std::collections::HashMap;

use symcore::{Derivation, RatExpr, Sym, Q};

use crate::error::{CoreError, Result};

pub type Mat = Vec<Vec<RatExpr>>;

#[derive(Clone, Debug)]
pub struct MetricData {
    pub n: usize,
    pub a: Mat,
    pub a_inv: Mat,
    pub det: RatExpr,
    /// Derivation rules for unit atoms occurring in the entries.
    pub rules: Derivation,
}

/// Exact inverse and determinant by Gauss-Jordan elimination.
pub fn invert(a: &Mat) -> Result<(Mat, RatExpr)> {
    let n = a.len();
    let mut m: Mat = a.to_vec();
    let mut inv: Mat = (0..n)
        .map(|i| (0..n).map(|j| if i == j { RatExpr::one() } else { RatExpr::zero() }).collect())
        .collect();
    let mut det = RatExpr::one();
    for col in 0..n {
        let pivot = (col..n)
            .find(|&r| !m[r][col].is_zero())
            .ok_or_else(|| CoreError::Singular("determinant vanishes identically".into()))?;
        if pivot != col {
            m.swap(pivot, col);
            inv.swap(pivot, col);
            det = -det;
        }
        let p = m[col][col].clone();
        det = det * p.clone();
        let pinv = p.recip()?;
        for j in 0..n {
            m[col][j] = &m[col][j] * &pinv;
            inv[col][j] = &inv[col][j] * &pinv;
        }
        for r in 0..n {
            if r == col || m[r][col].is_zero() {
                continue;
            }
            let f = m[r][col].clone();
            for j in 0..n {
                m[r][j] = &m[r][j] - &(&f * &m[col][j]);
                inv[r][j] = &inv[r][j] - &(&f * &inv[col][j]);
            }
        }
    }
    Ok((inv, det))
}

pub fn mat_mul(a: &Mat, b: &Mat) -> Mat {
    let n = a.len();
    (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(RatExpr::zero(), |acc, r| acc + &a[i][r] * &b[r][j]))
                .collect()
        })
        .collect()
}

pub fn build_metric(a: Mat, rules: Derivation) -> Result<MetricData> {
    let n = a.len();
    if a.iter().any(|row| row.len() != n) {
        return Err(CoreError::Validation("metric is not square".into()));
    }
    for i in 0..n {
        for j in 0..i {
            if a[i][j] != a[j][i] {
                return Err(CoreError::Validation(format!("metric is not symmetric at ({}, {})", i + 1, j + 1)));
            }
        }
    }
    let (a_inv, det) = invert(&a)?;
    Ok(MetricData { n, a, a_inv, det, rules })
}

/// `gamma[i][j][k]` holds the second-kind symbol with upper index `i`.
#[derive(Clone, Debug)]
pub struct Christoffel {
    pub n: usize,
    pub gamma: Vec<Mat>,
}

impl Christoffel {
    pub fn get(&self, i: usize, j: usize, k: usize) -> &RatExpr {
        &self.gamma[i][j][k]
    }
}

/// `d[r][k][j] = d a_rk / d x_j`.
fn metric_derivatives(m: &MetricData) -> Result<Vec<Mat>> {
    let n = m.n;
    let mut d = vec![vec![vec![RatExpr::zero(); n]; n]; n];
    for r in 0..n {
        for k in r..n {
            for j in 0..n {
                let v = m.a[r][k].derivative(Sym::x(j + 1), &m.rules)?;
                d[r][k][j] = v.clone();
                d[k][r][j] = v;
            }
        }
    }
    Ok(d)
}

/// First-kind symbols `[jk, r] = (d_j a_rk + d_k a_rj - d_r a_jk) / 2`.
pub fn christoffel_first(m: &MetricData) -> Result<Vec<Mat>> {
    let n = m.n;
    let d = metric_derivatives(m)?;
    let half = RatExpr::frac(1, 2);
    let mut out = vec![vec![vec![RatExpr::zero(); n]; n]; n];
    for r in 0..n {
        for j in 0..n {
            for k in j..n {
                let v = &half * &(&(&d[r][k][j] + &d[r][j][k]) - &d[j][k][r]);
                out[r][j][k] = v.clone();
                out[r][k][j] = v;
            }
        }
    }
    Ok(out)
}

pub fn christoffel(m: &MetricData) -> Result<Christoffel> {
    let n = m.n;
    let first = christoffel_first(m)?;
    let mut gamma = vec![vec![vec![RatExpr::zero(); n]; n]; n];
    for i in 0..n {
        for j in 0..n {
            for k in j..n {
                let v = (0..n).fold(RatExpr::zero(), |acc, r| acc + &m.a_inv[i][r] * &first[r][j][k]);
                gamma[i][j][k] = v.clone();
                gamma[i][k][j] = v;
            }
        }
    }
    Ok(Christoffel { n, gamma })
}

/// Tensors of a one-form with respect to the Levi-Civita connection, plus
/// their transvections by `y`.
#[derive(Clone, Debug)]
pub struct BetaData {
    pub n: usize,
    pub b: Vec<RatExpr>,
    pub b_up: Vec<RatExpr>,
    pub b2: RatExpr,
    /// `cov_b[i][j] = b_{i:j}`.
    pub cov_b: Mat,
    pub r: Mat,
    pub s: Mat,
    /// `s_up[i][j] = s^i_j`.
    pub s_up: Mat,
    pub s_low: Vec<RatExpr>,
    pub r_low: Vec<RatExpr>,
    pub t: Transvections,
}

/// Contractions with `y`.
#[derive(Clone, Debug)]
pub struct Transvections {
    pub alpha2: RatExpr,
    pub beta: RatExpr,
    pub r00: RatExpr,
    pub r0: RatExpr,
    pub s0: RatExpr,
    pub si0: Vec<RatExpr>,
    pub gamma2: RatExpr,
    pub gamma00: Vec<RatExpr>,
}

fn y(i: usize) -> RatExpr {
    RatExpr::var(Sym::y(i + 1))
}

pub fn contract1(v: &[RatExpr]) -> RatExpr {
    v.iter().enumerate().fold(RatExpr::zero(), |acc, (i, c)| acc + c * &y(i))
}

pub fn contract2(m: &Mat) -> RatExpr {
    let n = m.len();
    let mut acc = RatExpr::zero();
    for i in 0..n {
        for j in 0..n {
            if !m[i][j].is_zero() {
                acc = acc + &m[i][j] * &(&y(i) * &y(j));
            }
        }
    }
    acc
}

pub fn covariant_b(m: &MetricData, chr: &Christoffel, b: &[RatExpr]) -> Result<Mat> {
    let n = m.n;
    let mut cov = vec![vec![RatExpr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            let mut v = b[i].derivative(Sym::x(j + 1), &m.rules)?;
            for r in 0..n {
                v = v - &b[r] * chr.get(r, i, j);
            }
            cov[i][j] = v;
        }
    }
    Ok(cov)
}

pub fn beta_tensors(m: &MetricData, chr: &Christoffel, b: &[RatExpr]) -> Result<BetaData> {
    let n = m.n;
    if b.len() != n {
        return Err(CoreError::Validation(format!("one-form has {} components, expected {n}", b.len())));
    }
    let half = RatExpr::frac(1, 2);
    let b_up: Vec<RatExpr> = (0..n)
        .map(|i| (0..n).fold(RatExpr::zero(), |acc, r| acc + &m.a_inv[i][r] * &b[r]))
        .collect();
    let b2 = (0..n).fold(RatExpr::zero(), |acc, r| acc + &b_up[r] * &b[r]);
    let cov_b = covariant_b(m, chr, b)?;
    let mut r = vec![vec![RatExpr::zero(); n]; n];
    let mut s = vec![vec![RatExpr::zero(); n]; n];
    for i in 0..n {
        for j in 0..n {
            r[i][j] = &half * &(&cov_b[i][j] + &cov_b[j][i]);
            s[i][j] = &half * &(&cov_b[i][j] - &cov_b[j][i]);
        }
    }
    let s_up: Mat = (0..n)
        .map(|i| {
            (0..n)
                .map(|j| (0..n).fold(RatExpr::zero(), |acc, q| acc + &m.a_inv[i][q] * &s[q][j]))
                .collect()
        })
        .collect();
    let s_low: Vec<RatExpr> = (0..n)
        .map(|j| (0..n).fold(RatExpr::zero(), |acc, q| acc + &b[q] * &s_up[q][j]))
        .collect();
    let r_low: Vec<RatExpr> = (0..n)
        .map(|j| (0..n).fold(RatExpr::zero(), |acc, i| acc + &b_up[i] * &r[i][j]))
        .collect();
    let mut d = BetaData {
        n,
        b: b.to_vec(),
        b_up,
        b2,
        cov_b,
        r,
        s,
        s_up,
        s_low,
        r_low,
        t: Transvections {
            alpha2: RatExpr::zero(),
            beta: RatExpr::zero(),
            r00: RatExpr::zero(),
            r0: RatExpr::zero(),
            s0: RatExpr::zero(),
            si0: Vec::new(),
            gamma2: RatExpr::zero(),
            gamma00: Vec::new(),
        },
    };
    d.t = transvect(m, chr, &d);
    Ok(d)
}

/// `beta = b_i y^i`, `r00 = r_ij y^i y^j`, `r0 = r_j y^j` with
/// `r_j = b^i r_ij`, `s0 = s_j y^j`, `s^i_0 = s^i_j y^j`.
pub fn transvect(m: &MetricData, chr: &Christoffel, d: &BetaData) -> Transvections {
    let alpha2 = contract2(&m.a);
    let beta = contract1(&d.b);
    let gamma2 = &(&d.b2 * &alpha2) - &(&beta * &beta);
    Transvections {
        r00: contract2(&d.r),
        r0: contract1(&d.r_low),
        s0: contract1(&d.s_low),
        si0: d.s_up.iter().map(|row| contract1(row)).collect(),
        gamma00: chr.gamma.iter().map(contract2).collect(),
        alpha2,
        beta,
        gamma2,
    }
}

/// Substitutes rational values for coordinates (and unit atoms) everywhere.
pub fn pin_beta(d: &BetaData, vals: &HashMap<Sym, Q>) -> Result<BetaData> {
    let v = |e: &RatExpr| e.partial_eval(vals);
    let vv = |es: &[RatExpr]| es.iter().map(v).collect::<std::result::Result<Vec<_>, _>>();
    let mm = |m: &Mat| m.iter().map(|r| vv(r)).collect::<std::result::Result<Vec<_>, _>>();
    Ok(BetaData {
        n: d.n,
        b: vv(&d.b)?,
        b_up: vv(&d.b_up)?,
        b2: v(&d.b2)?,
        cov_b: mm(&d.cov_b)?,
        r: mm(&d.r)?,
        s: mm(&d.s)?,
        s_up: mm(&d.s_up)?,
        s_low: vv(&d.s_low)?,
        r_low: vv(&d.r_low)?,
        t: Transvections {
            alpha2: v(&d.t.alpha2)?,
            beta: v(&d.t.beta)?,
            r00: v(&d.t.r00)?,
            r0: v(&d.t.r0)?,
            s0: v(&d.t.s0)?,
            si0: vv(&d.t.si0)?,
            gamma2: v(&d.t.gamma2)?,
            gamma00: vv(&d.t.gamma00)?,
        },
    })
}

/// Metric, Christoffel symbols and one-form tensors of one space.
#[derive(Clone, Debug)]
pub struct Geometry {
    pub metric: MetricData,
    pub chr: Christoffel,
    pub beta: BetaData,
}

impl Geometry {
    pub fn new(a: Mat, b: &[RatExpr], rules: Derivation) -> Result<Self> {
        let metric = build_metric(a, rules)?;
        let chr = christoffel(&metric)?;
        let beta = beta_tensors(&metric, &chr, b)?;
        Ok(Geometry { metric, chr, beta })
    }

    pub fn n(&self) -> usize {
        self.metric.n
    }

    /// Same data with some symbols replaced by rational values.
    pub fn pin(&self, vals: &HashMap<Sym, Q>) -> Result<Geometry> {
        let mm = |m: &Mat| -> Result<Mat> {
            m.iter()
                .map(|r| r.iter().map(|e| Ok(e.partial_eval(vals)?)).collect())
                .collect()
        };
        Ok(Geometry {
            metric: MetricData {
                n: self.metric.n,
                a: mm(&self.metric.a)?,
                a_inv: mm(&self.metric.a_inv)?,
                det: self.metric.det.partial_eval(vals)?,
                rules: self.metric.rules.clone(),
            },
            chr: Christoffel {
                n: self.chr.n,
                gamma: self.chr.gamma.iter().map(|m| mm(m)).collect::<Result<_>>()?,
            },
            beta: pin_beta(&self.beta, vals)?,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use symcore::{parse_expr, SymbolTable};

    fn p(s: &str) -> RatExpr {
        parse_expr(s, &SymbolTable::full(3)).unwrap()
    }

    fn metric(rows: &[&[&str]]) -> MetricData {
        let a = rows.iter().map(|r| r.iter().map(|s| p(s)).collect()).collect();
        build_metric(a, Derivation::new()).unwrap()
    }

    #[test]
    fn inverse_of_diagonal() {
        let m = metric(&[&["1", "0"], &["0", "x1^2+1"]]);
        assert_eq!(m.a_inv[1][1], p("1/(x1^2+1)"));
        assert!(m.a_inv[0][1].is_zero());
        assert_eq!(m.det, p("x1^2+1"));
    }

    #[test]
    fn inverse_multiplies_back() {
        let m = metric(&[&["1+x2^2", "x1"], &["x1", "2+x1^2"]]);
        let id = mat_mul(&m.a, &m.a_inv);
        for (i, row) in id.iter().enumerate() {
            for (j, e) in row.iter().enumerate() {
                assert_eq!(e, &RatExpr::int((i == j) as i64));
            }
        }
    }

    #[test]
    fn asymmetric_and_singular_rejected() {
        let a = vec![vec![p("1"), p("1")], vec![p("0"), p("1")]];
        assert!(matches!(build_metric(a, Derivation::new()), Err(CoreError::Validation(_))));
        let a = vec![vec![p("x1"), p("x1")], vec![p("x1"), p("x1")]];
        assert!(matches!(build_metric(a, Derivation::new()), Err(CoreError::Singular(_))));
    }

    #[test]
    fn christoffel_of_polar_like_metric() {
        let m = metric(&[&["1", "0"], &["0", "x1^2"]]);
        let c = christoffel(&m).unwrap();
        assert_eq!(c.get(0, 1, 1), &p("-x1"));
        assert_eq!(c.get(1, 0, 1), &p("1/x1"));
        assert_eq!(c.get(1, 1, 0), &p("1/x1"));
        assert!(c.get(0, 0, 0).is_zero() && c.get(1, 1, 1).is_zero() && c.get(0, 0, 1).is_zero());
    }

    #[test]
    fn euclidean_examples() {
        let m = metric(&[&["1", "0"], &["0", "1"]]);
        let c = christoffel(&m).unwrap();
        assert!(c.gamma.iter().flatten().flatten().all(|e| e.is_zero()));
        let d = beta_tensors(&m, &c, &[p("3"), p("-1/2")]).unwrap();
        assert!(d.r.iter().chain(&d.s).flatten().all(|e| e.is_zero()));
        let d = beta_tensors(&m, &c, &[p("x2"), p("0")]).unwrap();
        assert_eq!(d.r[0][1], RatExpr::frac(1, 2));
        assert_eq!(d.r[1][0], RatExpr::frac(1, 2));
        assert_eq!(d.s[0][1], RatExpr::frac(1, 2));
        assert_eq!(d.s[1][0], RatExpr::frac(-1, 2));
        assert!(d.r[0][0].is_zero() && d.r[1][1].is_zero());
        assert_eq!(d.t.r00, p("y1*y2"));
        // s_j = b_r s^r_j: only s_2 = b_1 s^1_2 = x2 / 2 survives.
        assert_eq!(d.t.s0, p("x2*y2/2"));
    }

    #[test]
    fn conformally_flat_christoffel() {
        let e = symcore::atoms::unit();
        let mut grad = HashMap::new();
        grad.insert(Sym::x(1), RatExpr::one());
        grad.insert(Sym::x(2), RatExpr::zero());
        let e2 = RatExpr::var(e) * RatExpr::var(e);
        let a = vec![vec![e2.clone(), RatExpr::zero()], vec![RatExpr::zero(), e2]];
        let m = build_metric(a, Derivation::new().with_unit(e, grad)).unwrap();
        let c = christoffel(&m).unwrap();
        assert_eq!(c.get(0, 0, 0), &RatExpr::one());
        assert_eq!(c.get(0, 1, 1), &RatExpr::int(-1));
        assert_eq!(c.get(1, 0, 1), &RatExpr::one());
        assert!(c.get(1, 0, 0).is_zero() && c.get(1, 1, 1).is_zero());
    }
}
