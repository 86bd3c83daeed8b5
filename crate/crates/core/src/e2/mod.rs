//! E2-style control protocol: messages, binary codec, endpoint state machines.

mod agent;
mod codec;
mod message;
mod termination;
mod transport;

use thiserror::Error;

pub use agent::{AssociationPhase, AssociationState, E2Agent, RanControlHandler, Subscription};
pub use codec::{decode, decode_header, encode, CodecError, HEADER_LEN, MAGIC, VERSION};
pub use message::{
    standard_functions, ControlStatus, E2Message, HandoverCommand, RanFunction, HO_FUNCTION_NAME, KPM_FUNCTION_NAME,
};
pub use termination::{Dispatch, E2Termination, XAppId};
pub use transport::{FrameQueue, StreamTransport, Transport};

#[derive(Debug, Error)]
pub enum E2Error {
    #[error(transparent)]
    Codec(#[from] CodecError),
    #[error("protocol error: {0}")]
    Protocol(String),
    #[error("transport: {0}")]
    Io(#[from] std::io::Error),
}
