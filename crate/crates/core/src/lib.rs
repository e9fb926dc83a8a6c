//! Software twin of a 2×2×2 assembly of display-bearing, networked cubies:
//! pocket-cube mechanics, a shared 24-display game surface, a simulated
//! peer-to-peer firmware mesh, four games and a replayable session engine.

pub mod games;
pub mod geometry;
pub mod hash;
pub mod mesh;
#[cfg(feature = "serve")]
pub mod server;
pub mod session;
pub mod surface;
pub mod verify;
