//! The shipped example corpus, compiled into the binary and checked
//! against its SHA-256 manifest.

use sha2::{Digest, Sha256};

use super::resolve::{parse_document, Document};
use super::FrontendError;

pub struct CorpusFile {
    pub name: &'static str,
    pub text: &'static str,
}

macro_rules! corpus {
    ($($f:literal),* $(,)?) => {
        &[$(CorpusFile { name: $f, text: include_str!(concat!("../../../../corpus/", $f)) }),*]
    };
}

/// Every corpus file, dependencies first.
pub const CORPUS: &[CorpusFile] = corpus![
    "lattice.rspec",
    "bool.rspec",
    "heyting.rspec",
    "fixtures.rspec",
    "glivenko.rspec",
    "nat.rspec",
    "nat_nateq.rspec",
    "s_dt.rspec",
    "free_f.rspec",
    "slv.rspec",
    "slp.rspec",
    "slv_slp.rspec",
    "bams.rspec",
    "ordbams.rspec",
    "cpc_modal.rspec",
];

const MANIFEST: &str = include_str!("../../../../corpus/SHA256SUMS");

/// Look a file up by name, with or without a `corpus/` prefix or extension.
pub fn corpus_file(n: &str) -> Option<&'static CorpusFile> {
    let base = n.rsplit(['/', '\\']).next().unwrap_or(n);
    CORPUS.iter().find(|f| f.name == base || f.name.strip_suffix(".rspec") == Some(base))
}

pub fn sha256_hex(text: &str) -> String {
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

/// Compare every embedded file with the manifest.
pub fn verify_corpus() -> Result<(), FrontendError> {
    let mut listed = 0;
    for line in MANIFEST.lines().filter(|l| !l.trim().is_empty()) {
        let (hash, file) = line.split_once(char::is_whitespace).ok_or_else(|| FrontendError::Io(format!("bad manifest line `{line}`")))?;
        let file = file.trim().trim_start_matches('*');
        let f = corpus_file(file).ok_or_else(|| FrontendError::Io(format!("manifest lists unknown file `{file}`")))?;
        if sha256_hex(f.text) != hash {
            return Err(FrontendError::Io(format!("corpus file `{file}` does not match its recorded hash")));
        }
        listed += 1;
    }
    if listed != CORPUS.len() {
        return Err(FrontendError::Io(format!("manifest lists {listed} files, corpus has {}", CORPUS.len())));
    }
    Ok(())
}

/// Every corpus file, resolved. The corpus is compiled in, so a failure here
/// is a build defect rather than a user error.
pub fn load_corpus() -> Vec<(&'static str, Document)> {
    verify_corpus().expect("corpus integrity");
    CORPUS
        .iter()
        .map(|f| (f.name, parse_document(f.text).unwrap_or_else(|e| panic!("corpus file {}: {e}", f.name))))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn lookup_accepts_paths() {
        assert!(corpus_file("corpus/nat.rspec").is_some());
        assert!(corpus_file("nat").is_some());
        assert!(corpus_file("nope.rspec").is_none());
    }

    #[test]
    fn manifest_matches() {
        verify_corpus().unwrap();
    }

    #[test]
    fn known_digest() {
        assert_eq!(sha256_hex("abc"), "ba7816bf8f01cfea414140de5dae2223b00361a396177a9cb410ff61f20015ad");
    }
}
