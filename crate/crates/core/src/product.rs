use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Number of semi-finished product types made by the pre-assembly stage.
pub const NUM_PRODUCTS: usize = 8;

/// A product type, numbered 1 to 8. Action `a` produces product `a + 1`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(try_from = "u8", into = "u8")]
pub struct Product(u8);

impl Product {
    pub fn new(id: u8) -> Result<Self> {
        if (1..=NUM_PRODUCTS as u8).contains(&id) {
            Ok(Product(id))
        } else {
            Err(Error::Domain(format!("unknown product id {id}, expected 1..=8")))
        }
    }

    pub fn from_action(action: usize) -> Result<Self> {
        if action < NUM_PRODUCTS {
            Ok(Product(action as u8 + 1))
        } else {
            Err(Error::Domain(format!("action {action} out of range 0..=7")))
        }
    }

    pub fn id(self) -> u8 {
        self.0
    }

    /// Zero-based index, identical to the action that produces this product.
    pub fn index(self) -> usize {
        self.0 as usize - 1
    }

    pub fn all() -> impl Iterator<Item = Product> {
        (1..=NUM_PRODUCTS as u8).map(Product)
    }
}

impl TryFrom<u8> for Product {
    type Error = Error;

    fn try_from(id: u8) -> Result<Self> {
        Product::new(id)
    }
}

impl From<Product> for u8 {
    fn from(p: Product) -> u8 {
        p.0
    }
}

impl fmt::Display for Product {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "prod{}", self.0)
    }
}
