//! iSLIP request-grant-accept matching for an N×N crossbar.

/// `req(i, j)` is true when VOQ `(i, j)` holds a cell that can be sent.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct RequestMatrix {
    n: usize,
    bits: Vec<bool>,
    // Requests per input, so idle inputs are skipped without a row scan.
    row_counts: Vec<usize>,
    total: usize,
}

impl RequestMatrix {
    pub fn new(n: usize) -> Self {
        Self { n, bits: vec![false; n * n], row_counts: vec![0; n], total: 0 }
    }

    pub fn from_fn(n: usize, mut f: impl FnMut(usize, usize) -> bool) -> Self {
        let mut m = Self::new(n);
        for i in 0..n {
            for j in 0..n {
                m.set(i, j, f(i, j));
            }
        }
        m
    }

    pub fn ports(&self) -> usize {
        self.n
    }

    #[inline]
    pub fn get(&self, input: usize, output: usize) -> bool {
        self.bits[input * self.n + output]
    }

    pub fn set(&mut self, input: usize, output: usize, value: bool) {
        let slot = &mut self.bits[input * self.n + output];
        if *slot != value {
            *slot = value;
            if value {
                self.row_counts[input] += 1;
                self.total += 1;
            } else {
                self.row_counts[input] -= 1;
                self.total -= 1;
            }
        }
    }

    pub fn is_empty(&self) -> bool {
        self.total == 0
    }
}

/// Round-robin grant pointer per output and accept pointer per input.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct IslipState {
    pub grant: Vec<usize>,
    pub accept: Vec<usize>,
}

impl IslipState {
    pub fn new(n: usize) -> Self {
        Self { grant: vec![0; n], accept: vec![0; n] }
    }
}

/// A set of `(input, output)` pairs, each port used at most once.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct Matching {
    pairs: Vec<(usize, usize)>,
}

impl Matching {
    pub fn pairs(&self) -> &[(usize, usize)] {
        &self.pairs
    }

    pub fn len(&self) -> usize {
        self.pairs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.pairs.is_empty()
    }

    /// Each port used at most once and every pair backed by a request.
    pub fn is_valid_for(&self, req: &RequestMatrix) -> bool {
        let n = req.ports();
        let mut seen_in = vec![false; n];
        let mut seen_out = vec![false; n];
        self.pairs.iter().all(|&(i, j)| {
            let ok = i < n && j < n && !seen_in[i] && !seen_out[j] && req.get(i, j);
            if ok {
                seen_in[i] = true;
                seen_out[j] = true;
            }
            ok
        })
    }
}

/// Customary iteration count, `ceil(log2 n)` (at least one).
pub fn default_iterations(n: usize) -> usize {
    (usize::BITS - n.saturating_sub(1).leading_zeros()).max(1) as usize
}

/// Runs `iterations` rounds of iSLIP and updates the pointers.
///
/// Only matches made in the first round move the pointers, each to one past
/// the port it matched.
#[allow(clippy::needless_range_loop)]
pub fn islip_schedule(req: &RequestMatrix, state: &mut IslipState, iterations: usize) -> Matching {
    let n = req.ports();
    debug_assert_eq!(state.grant.len(), n);
    debug_assert_eq!(state.accept.len(), n);
    let mut matching = Matching::default();
    if req.is_empty() {
        return matching;
    }
    let mut in_matched = vec![false; n];
    let mut out_matched = vec![false; n];
    // grant_to[j]: input that output j granted this round.
    let mut grant_to: Vec<Option<usize>> = vec![None; n];

    for round in 0..iterations.max(1) {
        let mut any_grant = false;
        for j in 0..n {
            grant_to[j] = None;
            if out_matched[j] {
                continue;
            }
            let start = state.grant[j];
            for k in 0..n {
                let i = (start + k) % n;
                if !in_matched[i] && req.row_counts[i] > 0 && req.get(i, j) {
                    grant_to[j] = Some(i);
                    any_grant = true;
                    break;
                }
            }
        }
        if !any_grant {
            break;
        }
        let mut progress = false;
        for i in 0..n {
            if in_matched[i] {
                continue;
            }
            let start = state.accept[i];
            for k in 0..n {
                let j = (start + k) % n;
                if grant_to[j] == Some(i) {
                    in_matched[i] = true;
                    out_matched[j] = true;
                    matching.pairs.push((i, j));
                    if round == 0 {
                        state.grant[j] = (i + 1) % n;
                        state.accept[i] = (j + 1) % n;
                    }
                    progress = true;
                    break;
                }
            }
        }
        if !progress {
            break;
        }
    }
    matching
}
