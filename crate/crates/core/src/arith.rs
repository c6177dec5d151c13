//! Rational-integer helpers: primality, factorisation, small sieves.

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};
use crate::Int;

/// Trial division bound used before switching to Pollard rho.
pub const TRIAL_BOUND: u64 = 1_000_000;
/// Default iteration cap for a single Pollard rho run.
pub const RHO_CAP: u64 = 2_000_000;

pub fn int(v: i64) -> Int {
    BigInt::from(v)
}

pub fn to_u64(n: &Int) -> Option<u64> {
    n.to_u64()
}

pub fn to_i64(n: &Int) -> Option<i64> {
    n.to_i64()
}

pub fn primes_up_to(limit: u64) -> Vec<u64> {
    if limit < 2 {
        return Vec::new();
    }
    let n = limit as usize;
    let mut sieve = vec![true; n + 1];
    sieve[0] = false;
    sieve[1] = false;
    let mut i = 2;
    while i * i <= n {
        if sieve[i] {
            let mut j = i * i;
            while j <= n {
                sieve[j] = false;
                j += i;
            }
        }
        i += 1;
    }
    sieve.iter().enumerate().filter(|(_, &b)| b).map(|(i, _)| i as u64).collect()
}

fn mul_mod(a: u64, b: u64, m: u64) -> u64 {
    ((a as u128 * b as u128) % m as u128) as u64
}

pub fn pow_mod_u64(mut b: u64, mut e: u64, m: u64) -> u64 {
    let mut r = 1 % m;
    b %= m;
    while e > 0 {
        if e & 1 == 1 {
            r = mul_mod(r, b, m);
        }
        b = mul_mod(b, b, m);
        e >>= 1;
    }
    r
}

pub fn is_prime_u64(n: u64) -> bool {
    if n < 2 {
        return false;
    }
    for p in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        if n.is_multiple_of(p) {
            return n == p;
        }
    }
    let mut d = n - 1;
    let mut s = 0;
    while d.is_multiple_of(2) {
        d /= 2;
        s += 1;
    }
    'witness: for a in [2u64, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37] {
        let mut x = pow_mod_u64(a, d, n);
        if x == 1 || x == n - 1 {
            continue;
        }
        for _ in 1..s {
            x = mul_mod(x, x, n);
            if x == n - 1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

/// Miller-Rabin; deterministic below 3.3e24, overwhelmingly reliable above.
pub fn is_prime(n: &Int) -> bool {
    if n < &Int::from(2) {
        return false;
    }
    if let Some(v) = n.to_u64() {
        return is_prime_u64(v);
    }
    let bases: [u64; 20] = [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59, 61, 67, 71];
    for &p in &bases {
        if (n % p).is_zero() {
            return false;
        }
    }
    let one = Int::one();
    let nm1 = n - &one;
    let mut d = nm1.clone();
    let mut s = 0u32;
    while d.is_even() {
        d >>= 1;
        s += 1;
    }
    'witness: for &a in &bases {
        let mut x = Int::from(a).modpow(&d, n);
        if x == one || x == nm1 {
            continue;
        }
        for _ in 1..s {
            x = (&x * &x) % n;
            if x == nm1 {
                continue 'witness;
            }
        }
        return false;
    }
    true
}

fn pollard_brent(n: &Int, c: u64, cap: u64) -> Option<Int> {
    let c = Int::from(c);
    let f = |x: &Int| (x * x + &c) % n;
    let mut y = Int::from(2);
    let mut r: u64 = 1;
    let mut q = Int::one();
    let mut g = Int::one();
    let mut x = y.clone();
    let mut ys = y.clone();
    let m = 64u64;
    let mut iters = 0u64;
    while g.is_one() {
        x = y.clone();
        for _ in 0..r {
            y = f(&y);
        }
        let mut k = 0;
        while k < r && g.is_one() {
            ys = y.clone();
            for _ in 0..m.min(r - k) {
                y = f(&y);
                q = (q * (&x - &y).abs()) % n;
            }
            g = q.gcd(n);
            k += m;
            iters += m;
            if iters > cap {
                return None;
            }
        }
        r *= 2;
    }
    if &g == n {
        loop {
            ys = f(&ys);
            g = (&x - &ys).abs().gcd(n);
            if !g.is_one() {
                break;
            }
        }
    }
    if &g == n {
        None
    } else {
        Some(g)
    }
}

fn split_composite(n: &Int, cap: u64, out: &mut Vec<Int>) -> Result<()> {
    if n.is_one() {
        return Ok(());
    }
    if is_prime(n) {
        out.push(n.clone());
        return Ok(());
    }
    let r = n.sqrt();
    if &(&r * &r) == n {
        split_composite(&r, cap, out)?;
        return split_composite(&r, cap, out);
    }
    for c in 1..20u64 {
        if let Some(d) = pollard_brent(n, c, cap) {
            let e = n / &d;
            split_composite(&d, cap, out)?;
            return split_composite(&e, cap, out);
        }
    }
    Err(Error::FactorizationFailure(n.to_string()))
}

/// Factor |n| into (prime, exponent) pairs, ascending.
pub fn factor_with_cap(n: &Int, rho_cap: u64) -> Result<Vec<(Int, u32)>> {
    let mut n = n.abs();
    if n.is_zero() {
        return Err(Error::FactorizationFailure("0".into()));
    }
    let mut res: Vec<(Int, u32)> = Vec::new();
    let mut p = 2u64;
    while p <= TRIAL_BOUND {
        let pb = Int::from(p);
        if &pb * &pb > n {
            break;
        }
        if (&n % p).is_zero() {
            let mut e = 0;
            while (&n % p).is_zero() {
                n /= p;
                e += 1;
            }
            res.push((pb, e));
        }
        p += if p == 2 { 1 } else { 2 };
    }
    if !n.is_one() {
        let mut parts = Vec::new();
        split_composite(&n, rho_cap, &mut parts)?;
        parts.sort();
        for q in parts {
            match res.last_mut() {
                Some((r, e)) if *r == q => *e += 1,
                _ => res.push((q, 1)),
            }
        }
    }
    res.sort();
    Ok(res)
}

pub fn factor(n: &Int) -> Result<Vec<(Int, u32)>> {
    factor_with_cap(n, RHO_CAP)
}

/// `Some((p, k))` when `n = p^k` with p prime and k >= 1.
pub fn prime_power(n: &Int) -> Option<(Int, u32)> {
    if n < &Int::from(2) {
        return None;
    }
    let f = factor(n).ok()?;
    if f.len() == 1 {
        Some(f[0].clone())
    } else {
        None
    }
}

/// Split a discriminant `D = d * m^2` with `d` fundamental.
pub fn fundamental_part(disc: &Int) -> Result<(Int, Int)> {
    let f = factor(disc)?;
    let mut core = if disc.is_negative() { -Int::one() } else { Int::one() };
    let mut m = Int::one();
    for (p, e) in &f {
        if e % 2 == 1 {
            core *= p;
        }
        for _ in 0..e / 2 {
            m *= p;
        }
    }
    if core.mod_floor(&Int::from(4)) != Int::one() {
        // core is 2 or 3 mod 4: fundamental discriminant is 4*core
        if !m.is_even() {
            return Err(Error::Internal(format!("{} is not a discriminant", disc)));
        }
        core *= 4;
        m /= 2;
    }
    Ok((core, m))
}

pub fn is_square(n: &Int) -> bool {
    if n.is_negative() {
        return false;
    }
    let r = n.sqrt();
    &(&r * &r) == n
}

/// v_p(n) for n != 0.
pub fn valuation(n: &Int, p: &Int) -> u32 {
    let mut n = n.clone();
    let mut v = 0;
    if n.is_zero() {
        return u32::MAX;
    }
    while (&n % p).is_zero() {
        n /= p;
        v += 1;
    }
    v
}

pub fn ipow(b: &Int, e: u32) -> Int {
    num_traits::pow(b.clone(), e as usize)
}

/// Rounded division: nearest integer to a/b, ties toward +inf.
/// Natural logarithm of `|n|` for `n != 0`, accurate to f64 precision.
pub fn ln_abs(n: &Int) -> f64 {
    let bits = n.bits();
    if bits <= 1000 {
        return n.to_f64().map_or(f64::INFINITY, |x| x.abs().ln());
    }
    let shift = bits - 64;
    let top = (n.abs() >> shift).to_f64().expect("64-bit value");
    top.ln() + shift as f64 * std::f64::consts::LN_2
}

pub fn round_div(a: &Int, b: &Int) -> Int {
    let (num, den) = if b.is_negative() { (-a, -b) } else { (a.clone(), b.clone()) };
    (Int::from(2) * num + &den).div_floor(&(Int::from(2) * den))
}
