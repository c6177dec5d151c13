//! Ideal arithmetic in `O_F` and in orders of K.

pub mod kideal;
pub mod real;
pub mod reduce;

pub use kideal::{power_product, prime_below, primes_over, split_symbol, KIdeal, PrimeOverL};
pub use real::{primes_above, OFIdeal, RealPrime};
pub use reduce::{is_principal_bruteforce, reduce_ideal, Reduced};
