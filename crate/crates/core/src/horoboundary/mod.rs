//! Horofunctions, Busemann points and almost-geodesics.

mod busemann;
mod classify;
mod closure;
mod geodesic;

pub use busemann::*;
pub use classify::*;
pub use closure::*;
pub use geodesic::*;

#[cfg(test)]
mod tests;
