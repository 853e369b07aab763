//! Asymptotic list-decoding analysis on the AWGN channel.
//!
//! A codeword error (CE) for a list decoder of size L is the event that the
//! transmitted codeword is missing from the list of the L most likely
//! codewords. In signal space this happens exactly when the received point
//! lies beyond all L hyperplanes placed midway between the transmitted point
//! and the L alternatives, so the CE region is an intersection of half
//! spaces. The minimum Euclidean distance from the transmitted point to that
//! region — the vector Euclidean distance (VED) — sets the exponential rate
//! of the CE probability at high SNR.
//!
//! The crate is organized around that pipeline:
//!
//! - [`geometry`] computes the VED of an explicit set of difference vectors
//!   by Gram-matrix rank analysis and active-set quadratic programming.
//! - [`codes`] builds binary feedforward convolutional codes, enumerates
//!   their merged and unmerged trellis error events, and maps events to BPSK
//!   difference vectors.
//! - [`listmin`] minimizes the VED over all L-subsets of error events placed
//!   at relative time offsets, and finds the minimal list size whose
//!   asymptote matches unconstrained maximum-likelihood detection.
//! - [`sim`] estimates CE probabilities of Viterbi, list-Viterbi, and
//!   breadth-first decoders by reproducible parallel Monte Carlo and compares
//!   them against the Q-function asymptote.
//! - [`config`] and [`report`] carry the text interfaces: config files,
//!   E_b/N_0 grids, CSV schemas, and SVG sweep plots.

pub mod codes;
pub mod config;
pub mod geometry;
pub mod listmin;
pub mod report;
pub mod sim;
