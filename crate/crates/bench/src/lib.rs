//! Shared fixtures for the criterion benches.

use wlab_core::FreeProduct;

pub fn fixture(orders: &[usize]) -> FreeProduct {
    FreeProduct::cyclic(orders).expect("valid fixture")
}
