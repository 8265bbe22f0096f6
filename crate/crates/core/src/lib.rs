//! Grammar-based compression of labelled binary and unranked trees:
//! k-th order empirical tree entropy, normal-form tree straight-line
//! programs, their prefix-free binary encoding, and entropy reporting
//! for XML document structures.

pub mod codec;
pub mod compress;
pub mod entropy;
pub mod gen;
pub mod selfcheck;
pub mod strings;
pub mod trees;
pub mod tslp;
pub mod unranked;
