//! Caption token sequences with reserved special ids.

use crate::error::{Error, Result};

/// Reserved vocabulary slots. Content tokens start at `FIRST_CONTENT`.
pub const PAD: u32 = 0;
pub const BOS: u32 = 1;
pub const EOS: u32 = 2;
pub const FIRST_CONTENT: u32 = 3;

/// A caption as token ids, zero-padded to a fixed maximum length.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct TokenSequence {
    ids: Vec<u32>,
    j_actual: usize,
}

impl TokenSequence {
    /// Build from content tokens (no pad/bos/eos), padding with `PAD` to `j_max`.
    pub fn new(content: &[u32], j_max: usize, vocab: usize) -> Result<Self> {
        if content.is_empty() {
            return Err(Error::Empty("token sequence".into()));
        }
        if content.len() > j_max {
            return Err(Error::Data(format!(
                "caption of length {} exceeds maximum {}",
                content.len(),
                j_max
            )));
        }
        for &id in content {
            if id < FIRST_CONTENT {
                return Err(Error::Data(format!("reserved token id {} inside caption", id)));
            }
            if id as usize >= vocab {
                return Err(Error::TokenOutOfRange { id, vocab });
            }
        }
        let mut ids = content.to_vec();
        ids.resize(j_max, PAD);
        Ok(TokenSequence {
            ids,
            j_actual: content.len(),
        })
    }

    /// Unvalidated constructor; callers are responsible for the invariants.
    pub fn from_raw(ids: Vec<u32>, j_actual: usize) -> Self {
        TokenSequence { ids, j_actual }
    }

    /// The real tokens, pads excluded.
    pub fn tokens(&self) -> &[u32] {
        &self.ids[..self.j_actual]
    }

    /// Full padded id buffer.
    pub fn padded(&self) -> &[u32] {
        &self.ids
    }

    pub fn len(&self) -> usize {
        self.j_actual
    }

    pub fn is_empty(&self) -> bool {
        self.j_actual == 0
    }
}
