//! Output plumbing: atomic file writes, provenance headers, a small
//! deterministic hash, and the sweep worker pool.

use std::fs;
use std::io::Write;
use std::path::Path;

/// FNV-1a 64-bit, used to stamp a config hash into emitted files.
pub fn fnv1a(bytes: &[u8]) -> u64 {
    let mut hash = 0xcbf29ce484222325u64;
    for &b in bytes {
        hash ^= b as u64;
        hash = hash.wrapping_mul(0x100000001b3);
    }
    hash
}

/// Provenance comment line placed at the top of every emitted CSV.
pub fn provenance(config_repr: &str) -> String {
    format!(
        "# kpp-front-lab {} config-hash={:016x}",
        env!("CARGO_PKG_VERSION"),
        fnv1a(config_repr.as_bytes())
    )
}

/// Write via a temporary sibling and rename, so readers never observe a
/// half-written file.
pub fn write_atomic(path: &Path, content: &str) -> std::io::Result<()> {
    let tmp = path.with_extension("tmp-write");
    {
        let mut f = fs::File::create(&tmp)?;
        f.write_all(content.as_bytes())?;
        f.sync_all()?;
    }
    fs::rename(&tmp, path)
}

/// Worker count: KPP_FRONT_LAB_THREADS caps the pool, default is the
/// machine parallelism.
pub fn worker_count() -> usize {
    let available = std::thread::available_parallelism()
        .map(|n| n.get())
        .unwrap_or(1);
    match std::env::var("KPP_FRONT_LAB_THREADS")
        .ok()
        .and_then(|v| v.parse::<usize>().ok())
    {
        Some(n) if n >= 1 => n.min(available.max(1)),
        _ => available,
    }
}

/// Evaluate `f` on 0..n across the worker pool; results come back ordered
/// by index regardless of completion order.
pub fn parallel_map<T, F>(n: usize, f: F) -> Vec<T>
where
    T: Send,
    F: Fn(usize) -> T + Sync,
{
    let workers = worker_count().min(n.max(1));
    if workers <= 1 {
        return (0..n).map(f).collect();
    }
    let mut slots: Vec<Option<T>> = (0..n).map(|_| None).collect();
    let chunk = n.div_ceil(workers);
    std::thread::scope(|scope| {
        for (w, piece) in slots.chunks_mut(chunk).enumerate() {
            let f = &f;
            scope.spawn(move || {
                for (k, slot) in piece.iter_mut().enumerate() {
                    *slot = Some(f(w * chunk + k));
                }
            });
        }
    });
    slots.into_iter().map(|s| s.unwrap()).collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hash_is_stable() {
        assert_eq!(fnv1a(b"abc"), fnv1a(b"abc"));
        assert_ne!(fnv1a(b"abc"), fnv1a(b"abd"));
    }

    #[test]
    fn parallel_map_preserves_order() {
        let out = parallel_map(97, |i| i * i);
        for (i, v) in out.iter().enumerate() {
            assert_eq!(*v, i * i);
        }
    }
}
