pub mod frontend;
pub mod kws_decide;
pub mod score;
pub mod simulate;

use asc_core::Execution;

/// Outer per-entry loops are parallel unless `--sequential` is given.
pub(crate) fn execution(sequential: bool) -> Execution {
    if sequential {
        Execution::Sequential
    } else {
        Execution::Parallel
    }
}

/// Entries processed between writes, bounding memory on large runs.
pub(crate) const CHUNK: usize = 32;

/// Summary of entries that failed while the rest were processed.
pub(crate) fn entry_failures(errors: &[crate::CliError]) -> Option<crate::CliError> {
    if errors.is_empty() {
        return None;
    }
    let ids: Vec<String> = errors.iter().filter_map(|e| e.id.clone()).collect();
    Some(crate::CliError::data(format!("{} entries failed", errors.len())).with_keys(ids))
}
