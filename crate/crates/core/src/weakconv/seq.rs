//! Measure sequences and effective weak limits.

use std::collections::HashMap;
use std::fmt;
use std::sync::{Arc, Mutex};

use crate::functions::{BCFunction, COName};
use crate::kernel::Modulus;
use crate::measures::{CMeasure, ExactMeasure};

type SeqFn = dyn Fn(u64) -> CMeasure + Send + Sync;

/// A computable sequence `(μ_n)` of measures; members are memoized.
#[derive(Clone)]
pub struct MeasureSeq(Arc<SeqInner>);

struct SeqInner {
    f: Box<SeqFn>,
    memo: Mutex<HashMap<u64, CMeasure>>,
}

impl MeasureSeq {
    pub fn new(f: impl Fn(u64) -> CMeasure + Send + Sync + 'static) -> MeasureSeq {
        MeasureSeq(Arc::new(SeqInner {
            f: Box::new(f),
            memo: Mutex::new(HashMap::new()),
        }))
    }

    /// `μ_n`.
    pub fn at(&self, n: u64) -> CMeasure {
        if let Some(m) = self.0.memo.lock().unwrap().get(&n) {
            return m.clone();
        }
        let m = (self.0.f)(n);
        self.0.memo.lock().unwrap().entry(n).or_insert(m).clone()
    }

    /// Exact form of `μ_n`, when it has one.
    pub fn exact_at(&self, n: u64) -> Option<ExactMeasure> {
        self.at(n).exact().cloned()
    }
}

impl fmt::Debug for MeasureSeq {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "MeasureSeq({} members built)",
            self.0.memo.lock().unwrap().len()
        )
    }
}

type ModulusFor = dyn Fn(&BCFunction, u64) -> Modulus + Send + Sync;
type Cache<K> = Arc<Mutex<HashMap<(usize, u64), (K, Modulus)>>>;

/// `μ_n -> μ` weakly, with a modulus `g_{f,B}` for every `f` with `|f| <= B`:
/// `n >= g_{f,B}(k)` implies `|∫ f dμ_n - ∫ f dμ| < 2^-k`.
#[derive(Clone)]
pub struct EWLimit {
    pub seq: MeasureSeq,
    pub limit: CMeasure,
    modulus_for: Arc<ModulusFor>,
    cache: Cache<BCFunction>,
}

impl EWLimit {
    pub fn new(
        seq: MeasureSeq,
        limit: CMeasure,
        modulus_for: impl Fn(&BCFunction, u64) -> Modulus + Send + Sync + 'static,
    ) -> EWLimit {
        EWLimit {
            seq,
            limit,
            modulus_for: Arc::new(modulus_for),
            cache: Arc::default(),
        }
    }

    /// The modulus for `f` with `|f| <= b`; one instance per function object.
    pub fn modulus_for(&self, f: &BCFunction, b: u64) -> Modulus {
        let key = (f.id(), b);
        if let Some((_, m)) = self.cache.lock().unwrap().get(&key) {
            return m.clone();
        }
        let m = (self.modulus_for)(f, b);
        self.cache
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| (f.clone(), m.clone()))
            .1
            .clone()
    }
}

impl fmt::Debug for EWLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "EWLimit {{ seq: {:?}, limit: {:?} }}",
            self.seq, self.limit
        )
    }
}

type ModulusForName = dyn Fn(&COName, u64) -> Modulus + Send + Sync;

/// Weak limit whose moduli are computed from compact-open names alone.
#[derive(Clone)]
pub struct UEWLimit {
    pub seq: MeasureSeq,
    pub limit: CMeasure,
    modulus_for_name: Arc<ModulusForName>,
    cache: Cache<COName>,
}

impl UEWLimit {
    pub fn new(
        seq: MeasureSeq,
        limit: CMeasure,
        modulus_for_name: impl Fn(&COName, u64) -> Modulus + Send + Sync + 'static,
    ) -> UEWLimit {
        UEWLimit {
            seq,
            limit,
            modulus_for_name: Arc::new(modulus_for_name),
            cache: Arc::default(),
        }
    }

    /// The modulus for the function named by `rho`, bounded by `b`.
    pub fn modulus_for_name(&self, rho: &COName, b: u64) -> Modulus {
        let key = (rho.function().id(), b);
        if let Some((_, m)) = self.cache.lock().unwrap().get(&key) {
            return m.clone();
        }
        let m = (self.modulus_for_name)(rho, b);
        self.cache
            .lock()
            .unwrap()
            .entry(key)
            .or_insert_with(|| (rho.clone(), m.clone()))
            .1
            .clone()
    }
}

impl fmt::Debug for UEWLimit {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(
            f,
            "UEWLimit {{ seq: {:?}, limit: {:?} }}",
            self.seq, self.limit
        )
    }
}
