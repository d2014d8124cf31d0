//! On-disk sweep checkpoints: a manifest holding the spec, then per chain an
//! engine state file and a progress record. Files are replaced atomically.

use std::fs;
use std::path::{Path, PathBuf};

use crate::error::{Error, Result};
use crate::esf::EsfState;

use super::{ChainProgress, ChainSpec};

const MANIFEST: &str = "manifest.json";

#[derive(Debug, Clone)]
pub struct CheckpointDir {
    root: PathBuf,
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

impl CheckpointDir {
    /// Opens or creates `root` for `manifest`; refuses a directory written
    /// for a different spec.
    pub fn open(root: &Path, manifest: &str) -> Result<Self> {
        fs::create_dir_all(root)?;
        let path = root.join(MANIFEST);
        if path.exists() {
            let existing = fs::read_to_string(&path)?;
            if existing != manifest {
                return Err(Error::Checkpoint(format!(
                    "{} belongs to a different sweep spec",
                    root.display()
                )));
            }
        } else {
            write_atomic(&path, manifest)?;
        }
        Ok(Self { root: root.to_path_buf() })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    fn stem(chain: &ChainSpec) -> String {
        format!("chain-a{}-b{}", chain.a, chain.b)
    }

    fn state_path(&self, chain: &ChainSpec) -> PathBuf {
        self.root.join(format!("{}.state", Self::stem(chain)))
    }

    fn progress_path(&self, chain: &ChainSpec) -> PathBuf {
        self.root.join(format!("{}.json", Self::stem(chain)))
    }

    pub fn save(&self, chain: &ChainSpec, progress: &ChainProgress, state: Option<&EsfState>) -> Result<()> {
        if let Some(st) = state {
            write_atomic(&self.state_path(chain), &st.to_checkpoint())?;
        }
        write_atomic(&self.progress_path(chain), &serde_json::to_string_pretty(progress)?)
    }

    /// The saved progress, plus the engine state unless the chain finished.
    pub fn load(&self, chain: &ChainSpec) -> Result<Option<(ChainProgress, Option<EsfState>)>> {
        let ppath = self.progress_path(chain);
        if !ppath.exists() {
            return Ok(None);
        }
        let progress: ChainProgress = serde_json::from_str(&fs::read_to_string(&ppath)?)?;
        if progress.chain != *chain {
            return Err(Error::Checkpoint(format!("{} describes a different chain", ppath.display())));
        }
        if progress.done {
            return Ok(Some((progress, None)));
        }
        let state = EsfState::from_checkpoint(&fs::read_to_string(self.state_path(chain))?)?;
        if state.n() != progress.n_done
            || state.params().a() != chain.a
            || state.params().b() != chain.b
            || state.kmax() as u64 != chain.k_max
        {
            return Err(Error::Checkpoint(format!("state and progress disagree for chain a={}, b={}", chain.a, chain.b)));
        }
        Ok(Some((progress, Some(state))))
    }

    /// Drops the engine state of a finished chain.
    pub fn finish(&self, chain: &ChainSpec, progress: &ChainProgress) -> Result<()> {
        self.save(chain, progress, None)?;
        let sp = self.state_path(chain);
        if sp.exists() {
            fs::remove_file(sp)?;
        }
        Ok(())
    }
}
