//! Reliable, ordered, message-preserving transports for encoded E2 frames.

use std::collections::VecDeque;
use std::io::{self, Read, Write};

use super::codec::{decode_header, HEADER_LEN};

pub trait Transport {
    fn send(&mut self, frame: &[u8]) -> io::Result<()>;
    /// Next complete frame, or `None` when nothing is pending.
    fn recv(&mut self) -> io::Result<Option<Vec<u8>>>;
}

/// One-directional in-process frame queue.
#[derive(Debug, Default)]
pub struct FrameQueue {
    frames: VecDeque<Vec<u8>>,
    sent: u64,
}

impl FrameQueue {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.frames.len()
    }

    pub fn is_empty(&self) -> bool {
        self.frames.is_empty()
    }

    pub fn sent(&self) -> u64 {
        self.sent
    }
}

impl Transport for FrameQueue {
    fn send(&mut self, frame: &[u8]) -> io::Result<()> {
        self.sent += 1;
        self.frames.push_back(frame.to_vec());
        Ok(())
    }

    fn recv(&mut self) -> io::Result<Option<Vec<u8>>> {
        Ok(self.frames.pop_front())
    }
}

/// Frames over a byte stream using the codec header's length field.
#[derive(Debug)]
pub struct StreamTransport<S> {
    stream: S,
}

impl<S: Read + Write> StreamTransport<S> {
    pub fn new(stream: S) -> Self {
        Self { stream }
    }

    pub fn into_inner(self) -> S {
        self.stream
    }
}

impl<S: Read + Write> Transport for StreamTransport<S> {
    fn send(&mut self, frame: &[u8]) -> io::Result<()> {
        self.stream.write_all(frame)?;
        self.stream.flush()
    }

    /// Blocks until a full frame arrives; `None` on clean EOF.
    fn recv(&mut self) -> io::Result<Option<Vec<u8>>> {
        let mut header = [0u8; HEADER_LEN];
        match self.stream.read_exact(&mut header) {
            Ok(()) => {}
            Err(e) if e.kind() == io::ErrorKind::UnexpectedEof => return Ok(None),
            Err(e) => return Err(e),
        }
        let (_, len) = decode_header(&header).map_err(|e| io::Error::new(io::ErrorKind::InvalidData, e))?;
        let mut frame = header.to_vec();
        frame.resize(HEADER_LEN + len, 0);
        self.stream.read_exact(&mut frame[HEADER_LEN..])?;
        Ok(Some(frame))
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::e2::{decode, encode, E2Message};

    #[test]
    fn queue_is_fifo() {
        let mut q = FrameQueue::new();
        q.send(&[1]).unwrap();
        q.send(&[2]).unwrap();
        assert_eq!(q.recv().unwrap(), Some(vec![1]));
        assert_eq!(q.recv().unwrap(), Some(vec![2]));
        assert_eq!(q.recv().unwrap(), None);
    }

    #[cfg(unix)]
    #[test]
    fn socket_pair_preserves_frames() {
        use std::os::unix::net::UnixStream;
        let (a, b) = UnixStream::pair().unwrap();
        let mut tx = StreamTransport::new(a);
        let mut rx = StreamTransport::new(b);
        let msgs = vec![
            E2Message::E2SetupResponse { node_id: 9, accepted: true },
            E2Message::E2SetupRequest { node_id: 9, ran_functions: crate::e2::standard_functions() },
        ];
        for m in &msgs {
            tx.send(&encode(m).unwrap()).unwrap();
        }
        drop(tx);
        let mut got = Vec::new();
        while let Some(frame) = rx.recv().unwrap() {
            got.push(decode(&frame).unwrap());
        }
        assert_eq!(got, msgs);
    }
}
