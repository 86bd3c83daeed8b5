//! Near-RT RIC runtime: xApp hosting, subscription management, routing, SDL.

mod runtime;
mod sdl;

use thiserror::Error;

use crate::e2::{E2Error, XAppId};
use crate::radio::{CellId, UeId};
use crate::sim::SimTime;

pub use runtime::{Ric, RicCounters, XApp, XAppContext, XAppDescriptor, XAppMsg};
pub use sdl::{SdlStore, DEFAULT_SDL_CAPACITY};

#[derive(Debug, Error)]
pub enum RicError {
    #[error("xApp name {0:?} already registered")]
    DuplicateXApp(String),
    #[error("re-entrant dispatch into xApp {0:?}")]
    Reentrant(XAppId),
    #[error("non-monotone SDL write for ue {ue} cell {cell}: t={t} after {last}")]
    NonMonotone { ue: UeId, cell: CellId, t: SimTime, last: SimTime },
    #[error(transparent)]
    E2(#[from] E2Error),
    #[error("SDL dump: {0}")]
    Csv(#[from] csv::Error),
    #[error("SDL dump: {0}")]
    Io(#[from] std::io::Error),
}
