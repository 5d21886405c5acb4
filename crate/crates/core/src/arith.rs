//! Integer kernels: modular inverses, Kloosterman sums, divisor weights and
//! prime enumeration.

use num_integer::Integer;

use crate::error::{Error, Result};
use crate::rigor::{Enclosure, Rigorous};

/// The inverse of `k` modulo `c`, in `[0, c)`.
pub fn mod_inverse(k: u64, c: u64) -> Result<u64> {
    if c == 0 {
        return Err(Error::Parameter("modulus must be positive".into()));
    }
    if c == 1 {
        return Ok(0);
    }
    let eg = (k as i128 % c as i128).extended_gcd(&(c as i128));
    if eg.gcd != 1 {
        return Err(Error::NotCoprime { value: k, modulus: c });
    }
    Ok(eg.x.rem_euclid(c as i128) as u64)
}

fn two_pi() -> Enclosure {
    Enclosure::new(std::f64::consts::TAU, std::f64::consts::TAU.next_up())
}

/// `cos(2π r / c)` with `0 ≤ r < c`, folded so the angle lies in `[0, π]`.
fn cos_phase(r: u64, c: u64) -> Enclosure {
    let r = r.min(c - r);
    (two_pi() * Enclosure::from_u64(r) / Enclosure::from_u64(c)).cos()
}

/// Kloosterman sum `S(m, n; c)`, real, with `S(·, ·; 1) = 1`.
pub fn kloosterman(m: u64, n: u64, c: u64) -> Enclosure {
    assert!(c >= 1, "modulus must be positive");
    if c == 1 {
        return Enclosure::ONE;
    }
    if c == 2 {
        return if (m + n) % 2 == 0 { Enclosure::ONE } else { -Enclosure::ONE };
    }
    // S(m, n; c) = S(n, m; c); a fixed order keeps both enclosures identical.
    let (m, n) = ((m % c).min(n % c), (m % c).max(n % c));
    let mut sum = Enclosure::ZERO;
    // k and c-k give conjugate summands; k = c/2 is never a unit for c > 2.
    for k in 1..=(c - 1) / 2 {
        if k.gcd(&c) != 1 {
            continue;
        }
        let kinv = mod_inverse(k, c).expect("unit");
        let r = ((m as u128 * k as u128 + n as u128 * kinv as u128) % c as u128) as u64;
        sum = sum + cos_phase(r, c);
    }
    sum * Enclosure::point(2.0)
}

/// Batch evaluation of `S(m, b·n; c)` for `n = 1..=n_max`.
///
/// Cosines are tabulated once per modulus on an integer grid and summed
/// exactly; the enclosure radius is the table error times the number of
/// summands.
pub struct KloostermanRow {
    m: u64,
    mult: u64,
    c: u64,
    a: Vec<u64>,
    b: Vec<u64>,
    table: Vec<i64>,
    shift: i32,
    entry_err: f64,
}

impl KloostermanRow {
    /// Prepares the sums `S(m, mult·n; c)`.
    pub fn new(m: u64, mult: u64, c: u64) -> Self {
        assert!(c >= 1);
        let mut a = Vec::new();
        let mut b = Vec::new();
        if c > 2 {
            for k in 1..=(c - 1) / 2 {
                if k.gcd(&c) != 1 {
                    continue;
                }
                let kinv = mod_inverse(k, c).expect("unit");
                a.push(((m as u128 * k as u128) % c as u128) as u64);
                b.push(((mult as u128 % c as u128) * kinv as u128 % c as u128) as u64);
            }
        }
        // Keep |Σ| < 2^62 for up to c/2 summands.
        let bits = 64 - (c.max(2)).leading_zeros() as i32;
        let shift = (61 - bits).min(52);
        let scale = 2f64.powi(shift);
        let table: Vec<i64> = if c > 2 {
            (0..c)
                .map(|j| ((std::f64::consts::TAU * (j as f64 / c as f64)).cos() * scale).round() as i64)
                .collect()
        } else {
            Vec::new()
        };
        // Grid rounding plus angle and libm error of the f64 cosine.
        let entry_err = 0.5 / scale + 1e-14;
        KloostermanRow { m, mult, c, a, b, table, shift, entry_err }
    }

    pub fn modulus(&self) -> u64 {
        self.c
    }

    /// Enclosures of `S(m, mult·n; c)` for `n = 1..=n_max`.
    pub fn values(&self, n_max: usize) -> Vec<Enclosure> {
        let c = self.c;
        if c <= 2 {
            return (1..=n_max as u64).map(|n| kloosterman(self.m, (self.mult % c) * (n % c), c)).collect();
        }
        let mut acc = vec![0i64; n_max + 1];
        for (&a, &b) in self.a.iter().zip(&self.b) {
            let mut phase = a;
            for slot in acc.iter_mut().skip(1) {
                phase += b;
                if phase >= c {
                    phase -= c;
                }
                *slot += self.table[phase as usize];
            }
        }
        let pairs = self.a.len() as f64;
        let err = Enclosure::point(self.entry_err) * Enclosure::point(pairs);
        let inv = 2f64.powi(1 - self.shift);
        acc[1..]
            .iter()
            .map(|&s| {
                let v = Enclosure::from_int(s) * Enclosure::point(inv);
                v + Enclosure::symmetric(err * Enclosure::point(2.0))
            })
            .collect()
    }
}

/// Number of divisors of `n`.
pub fn divisor_count(n: u64) -> u64 {
    assert!(n >= 1);
    factorize(n).iter().map(|&(_, e)| e as u64 + 1).product()
}

/// Prime factorisation by trial division.
pub fn factorize(mut n: u64) -> Vec<(u64, u32)> {
    let mut out = Vec::new();
    let mut p = 2u64;
    while p * p <= n {
        if n % p == 0 {
            let mut e = 0;
            while n % p == 0 {
                n /= p;
                e += 1;
            }
            out.push((p, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if n > 1 {
        out.push((n, 1));
    }
    out
}

pub fn divisors(n: u64) -> Vec<u64> {
    let mut ds = vec![1u64];
    for (p, e) in factorize(n) {
        let len = ds.len();
        let mut pk = 1;
        for _ in 0..e {
            pk *= p;
            for i in 0..len {
                ds.push(ds[i] * pk);
            }
        }
    }
    ds.sort_unstable();
    ds
}

/// `f(k) = Σ_{k'|k} 1/√k'` in any rigorous arithmetic.
pub fn f_weight_in<R: Rigorous>(k: u64) -> R {
    divisors(k)
        .into_iter()
        .map(|d| R::from_int(1) / R::from_u64(d).sqrt())
        .reduce(|a, b| a + b)
        .expect("1 divides k")
}

pub fn f_weight(k: u64) -> Enclosure {
    f_weight_in(k)
}

/// `g(m) = Σ_{m'|m} f(m') τ(m') / m'^{3/2}`.
pub fn g_weight_in<R: Rigorous>(m: u64) -> R {
    divisors(m)
        .into_iter()
        .map(|d| {
            let de = R::from_u64(d);
            f_weight_in::<R>(d) * R::from_u64(divisor_count(d)) / (de.clone() * de.sqrt())
        })
        .reduce(|a, b| a + b)
        .expect("1 divides m")
}

pub fn g_weight(m: u64) -> Enclosure {
    g_weight_in(m)
}

/// `τ(n)` for `0 ≤ n ≤ limit` (index 0 unused).
pub fn divisor_count_table(limit: usize) -> Vec<u32> {
    let mut t = vec![0u32; limit + 1];
    for d in 1..=limit {
        for slot in t.iter_mut().skip(d).step_by(d) {
            *slot += 1;
        }
    }
    t
}

/// Upper bound for `Σ_{k>K} τ(k) k^{-3/2}`.
///
/// Writing `k = ab` and summing over `a ≤ K` first, then the remaining range
/// where `a > K`, and using `Σ_{b>B} b^{-3/2} ≤ 2/√B`.
pub fn tau_tail_bound(k: u64) -> Enclosure {
    assert!(k >= 1);
    // Σ_{ab > K} (ab)^{-3/2} ≤ Σ_{a≤K} a^{-3/2} 2/√⌊K/a⌋ + Σ_{a>K} a^{-3/2} ζ(3/2)
    let zeta = crate::rigor::const_zeta32_squared().sqrt();
    let mut s = Enclosure::ZERO;
    for a in 1..=k {
        let ae = Enclosure::from_u64(a);
        let q = Enclosure::from_u64(k / a);
        s = s + Enclosure::point(2.0) / (ae * ae.sqrt() * q.sqrt());
    }
    let tail = zeta * Enclosure::point(2.0) / Enclosure::from_u64(k).sqrt();
    (s + tail).upper()
}

/// Deterministic Miller–Rabin for all 64-bit inputs.
pub fn is_prime(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n % p == 0 {
            return n == p;
        }
    }
    let mul = |a: u64, b: u64| ((a as u128 * b as u128) % n as u128) as u64;
    let pow = |mut a: u64, mut e: u64| {
        let mut r = 1u64;
        while e > 0 {
            if e & 1 == 1 {
                r = mul(r, a);
            }
            a = mul(a, a);
            e >>= 1;
        }
        r
    };
    let s = (n - 1).trailing_zeros();
    let d = (n - 1) >> s;
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow(a, d);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul(x, x);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Primes in `[a, b]`, ascending, by a segmented sieve.
pub fn primes_in(a: u64, b: u64) -> Vec<u64> {
    if b < 2 || a > b {
        return Vec::new();
    }
    let a = a.max(2);
    let root = (b as f64).sqrt() as u64 + 1;
    let mut small = vec![true; root as usize + 1];
    let mut base = Vec::new();
    for i in 2..=root as usize {
        if small[i] {
            base.push(i as u64);
            let mut j = i * i;
            while j <= root as usize {
                small[j] = false;
                j += i;
            }
        }
    }
    const SEG: u64 = 1 << 16;
    let mut out = Vec::new();
    let mut lo = a;
    while lo <= b {
        let hi = (lo + SEG - 1).min(b);
        let mut seg = vec![true; (hi - lo + 1) as usize];
        for &p in &base {
            if p * p > hi {
                break;
            }
            let start = (p * p).max(lo.div_ceil(p) * p);
            let mut j = start;
            while j <= hi {
                seg[(j - lo) as usize] = false;
                j += p;
            }
        }
        out.extend(seg.iter().enumerate().filter(|(_, &ok)| ok).map(|(i, _)| lo + i as u64));
        if hi == u64::MAX {
            break;
        }
        lo = hi + 1;
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn inverses() {
        assert_eq!(mod_inverse(1, 7).unwrap(), 1);
        assert_eq!(mod_inverse(3, 7).unwrap(), 5);
        assert!(matches!(mod_inverse(2, 4), Err(Error::NotCoprime { .. })));
        assert_eq!(mod_inverse(5, 1).unwrap(), 0);
    }

    #[test]
    fn small_kloosterman() {
        assert!(kloosterman(1, 1, 1).contains(1.0));
        assert!(kloosterman(1, 1, 2).contains(1.0));
        assert!(kloosterman(1, 1, 3).contains(-1.0));
        assert!(kloosterman(1, 1, 3).width() < 1e-14);
    }

    #[test]
    fn row_matches_single_sums() {
        for &(m, mult, c) in &[(1u64, 1u64, 7u64), (2, 5, 12), (1, 3, 97), (2, 1, 2), (1, 4, 1)] {
            let row = KloostermanRow::new(m, mult, c);
            let vals = row.values(40);
            for (i, v) in vals.iter().enumerate() {
                let n = i as u64 + 1;
                let direct = kloosterman(m, mult * n, c);
                assert!(v.intersects(&direct), "S({m},{}; {c}) {v:?} vs {direct:?}", mult * n);
                assert!(v.width() < 1e-9);
            }
        }
    }

    #[test]
    fn divisor_functions() {
        assert_eq!(divisor_count(1), 1);
        assert_eq!(divisor_count(12), 6);
        assert_eq!(divisor_count(101), 2);
        assert_eq!(divisors(12), vec![1, 2, 3, 4, 6, 12]);
        let t = divisor_count_table(100);
        for (n, &tn) in t.iter().enumerate().skip(1) {
            assert_eq!(tn as u64, divisor_count(n as u64));
        }
    }

    #[test]
    fn weights() {
        assert!(f_weight(1).contains(1.0));
        assert!((f_weight(2).mid() - 1.707_106_781_186_547_6).abs() < 1e-14);
        assert!((f_weight(4).mid() - 2.207_106_781_186_547_6).abs() < 1e-14);
        assert!(g_weight(1).contains(1.0));
        assert!((g_weight(2).mid() - 2.207_106_781_186_547_6).abs() < 1e-14);
    }

    #[test]
    fn tau_tail_is_an_upper_bound() {
        let t = divisor_count_table(200_000);
        let k = 50u64;
        let partial: f64 = (k as usize + 1..=200_000).map(|n| t[n] as f64 / (n as f64).powf(1.5)).sum();
        assert!(tau_tail_bound(k).hi() > partial);
        assert!(tau_tail_bound(k).hi() < 4.0 * partial);
    }

    #[test]
    fn primes() {
        assert_eq!(primes_in(2, 10), vec![2, 3, 5, 7]);
        assert_eq!(primes_in(1210, 1220), vec![1213, 1217]);
        assert!(primes_in(14, 16).is_empty());
        let sieved = primes_in(1, 5000);
        let mr: Vec<u64> = (1..=5000).filter(|&n| is_prime(n)).collect();
        assert_eq!(sieved, mr);
        assert!(is_prime(18_446_744_073_709_551_557));
    }
}
