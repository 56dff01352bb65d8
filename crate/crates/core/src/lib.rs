//! Repeated posted-price auctions between a revenue-maximizing seller and a
//! strategic buyer who discounts future surplus.
//!
//! The crate is organized around the play loop in [`game`]: a seller from
//! [`sellers`] quotes a price each round, a buyer from [`buyers`] accepts or
//! rejects it, and the transcript is scored for seller regret and buyer
//! surplus. [`analysis`] evaluates the closed-form regret bounds the
//! algorithms are measured against, and [`harness`] runs parameter sweeps
//! and writes CSV and SVG output.

pub mod analysis;
pub mod buyers;
pub mod error;
pub mod game;
pub mod harness;
pub mod sellers;
pub mod verify;

pub use error::{Error, Result};
pub use game::{
    acceptance_time, discounted_surplus, play_game, score, strategic_regret, BuyerPolicy,
    GameConfig, GameOutcome, Round, Transcript,
};
pub use sellers::{make_seller, PenaltySemantics, PriceMachine, SellerMachine, SellerSpec};
