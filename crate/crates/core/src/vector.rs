use core::fmt;
use core::ops::{Deref, DerefMut};

/// Largest state or action dimensionality supported by the inline vectors.
pub const MAX_DIM: usize = 4;

#[derive(Clone, Copy, PartialEq)]
struct Inline {
    data: [f64; MAX_DIM],
    len: u8,
}

impl Inline {
    fn from_slice(values: &[f64]) -> Self {
        assert!(values.len() <= MAX_DIM, "vector longer than MAX_DIM");
        let mut data = [0.0; MAX_DIM];
        data[..values.len()].copy_from_slice(values);
        Inline {
            data,
            len: values.len() as u8,
        }
    }

    fn as_slice(&self) -> &[f64] {
        &self.data[..self.len as usize]
    }

    fn as_mut_slice(&mut self) -> &mut [f64] {
        &mut self.data[..self.len as usize]
    }
}

macro_rules! inline_vec {
    ($(#[$meta:meta])* $name:ident) => {
        $(#[$meta])*
        #[derive(Clone, Copy, PartialEq)]
        pub struct $name(Inline);

        impl $name {
            pub fn new(values: &[f64]) -> Self {
                $name(Inline::from_slice(values))
            }

            pub fn zeros(dim: usize) -> Self {
                $name(Inline::from_slice(&[0.0; MAX_DIM][..dim]))
            }

            pub fn dim(&self) -> usize {
                self.0.len as usize
            }

            pub fn as_slice(&self) -> &[f64] {
                self.0.as_slice()
            }

            pub fn to_vec(&self) -> alloc::vec::Vec<f64> {
                self.as_slice().to_vec()
            }
        }

        impl Deref for $name {
            type Target = [f64];
            fn deref(&self) -> &[f64] {
                self.0.as_slice()
            }
        }

        impl DerefMut for $name {
            fn deref_mut(&mut self) -> &mut [f64] {
                self.0.as_mut_slice()
            }
        }

        impl fmt::Debug for $name {
            fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                write!(f, "{}{:?}", stringify!($name), self.as_slice())
            }
        }

        #[cfg(feature = "serde")]
        impl serde::Serialize for $name {
            fn serialize<S: serde::Serializer>(&self, s: S) -> core::result::Result<S::Ok, S::Error> {
                self.as_slice().serialize(s)
            }
        }

        #[cfg(feature = "serde")]
        impl<'de> serde::Deserialize<'de> for $name {
            fn deserialize<D: serde::Deserializer<'de>>(d: D) -> core::result::Result<Self, D::Error> {
                let v = alloc::vec::Vec::<f64>::deserialize(d)?;
                if v.len() > MAX_DIM {
                    return Err(serde::de::Error::invalid_length(v.len(), &"at most MAX_DIM components"));
                }
                Ok($name::new(&v))
            }
        }
    };
}

inline_vec!(
    /// A point in an environment's state space (`(x, y)` or `(x, y, heading)`).
    StateVec
);
inline_vec!(
    /// A normalized action; every component lies in `[-1, 1]`.
    ActionVec
);

impl StateVec {
    pub fn distance_sq(&self, other: &StateVec) -> f64 {
        self.iter()
            .zip(other.iter())
            .map(|(a, b)| (a - b) * (a - b))
            .sum()
    }
}

impl ActionVec {
    pub fn is_normalized(&self) -> bool {
        self.iter()
            .all(|c| c.is_finite() && (-1.0..=1.0).contains(c))
    }

    pub fn clamped(mut self) -> Self {
        for c in self.iter_mut() {
            *c = c.clamp(-1.0, 1.0);
        }
        self
    }
}
