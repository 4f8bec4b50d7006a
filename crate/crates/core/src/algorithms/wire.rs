//! Byte encoding for the handful of values the algorithms exchange.

use num_bigint::BigUint;

use crate::rational::Rat;
use crate::sim::{Fault, Message};

#[derive(Default)]
pub(crate) struct Writer(Vec<u8>);

impl Writer {
    pub(crate) fn new() -> Writer {
        Writer(Vec::new())
    }

    pub(crate) fn uint(mut self, mut x: u64) -> Writer {
        loop {
            let byte = (x & 0x7f) as u8;
            x >>= 7;
            if x == 0 {
                self.0.push(byte);
                return self;
            }
            self.0.push(byte | 0x80);
        }
    }

    fn big(self, x: &BigUint) -> Writer {
        let bytes = x.to_bytes_le();
        let mut w = self.uint(bytes.len() as u64);
        w.0.extend_from_slice(&bytes);
        w
    }

    pub(crate) fn rat(self, x: &Rat) -> Writer {
        self.big(x.numer()).big(x.denom())
    }

    pub(crate) fn finish(self) -> Message {
        self.0
    }
}

pub(crate) struct Reader<'a> {
    buf: &'a [u8],
    pos: usize,
}

impl<'a> Reader<'a> {
    pub(crate) fn new(buf: &'a [u8]) -> Reader<'a> {
        Reader { buf, pos: 0 }
    }

    fn byte(&mut self) -> Result<u8, Fault> {
        let b = *self.buf.get(self.pos).ok_or_else(|| Fault::Protocol("truncated message".into()))?;
        self.pos += 1;
        Ok(b)
    }

    pub(crate) fn uint(&mut self) -> Result<u64, Fault> {
        let mut x = 0u64;
        for shift in (0..64).step_by(7) {
            let b = self.byte()?;
            x |= u64::from(b & 0x7f) << shift;
            if b & 0x80 == 0 {
                return Ok(x);
            }
        }
        Err(Fault::Protocol("varint too long".into()))
    }

    fn big(&mut self) -> Result<BigUint, Fault> {
        let len = self.uint()? as usize;
        let end = self.pos.checked_add(len).filter(|&e| e <= self.buf.len());
        let end = end.ok_or_else(|| Fault::Protocol("truncated integer".into()))?;
        let x = BigUint::from_bytes_le(&self.buf[self.pos..end]);
        self.pos = end;
        Ok(x)
    }

    pub(crate) fn rat(&mut self) -> Result<Rat, Fault> {
        let p = self.big()?;
        let q = self.big()?;
        if q.bits() == 0 {
            return Err(Fault::Protocol("zero denominator".into()));
        }
        Ok(Rat::from_big(p, q))
    }
}

/// The message behind a port that must carry one.
pub(crate) fn expect<'a>(inbox: &'a [Option<Message>], port: usize) -> Result<Reader<'a>, Fault> {
    inbox
        .get(port - 1)
        .and_then(Option::as_deref)
        .map(Reader::new)
        .ok_or_else(|| Fault::Protocol(format!("expected a message on port {port}")))
}
