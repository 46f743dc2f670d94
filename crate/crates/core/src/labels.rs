//! Categorical vertex labels and label-merge maps.
//!
//! A labeling assigns every vertex one name from a finite alphabet. Coarser
//! labelings (Left/Right from {LG,LW,RG,RW}, say) are derived through a
//! [`MergeMap`], a partition of the fine alphabet into named groups.

use std::collections::HashMap;
use std::fs::File;
use std::io::{BufRead, BufReader};
use std::path::Path;

use crate::error::{Error, Result};

/// One label per vertex, stored as indices into a shared alphabet.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct VertexLabels {
    alphabet: Vec<String>,
    assign: Vec<u32>,
}

impl VertexLabels {
    /// Build from per-vertex label names. The alphabet is the sorted set of
    /// distinct names, so the index mapping is independent of vertex order.
    ///
    /// # Errors
    /// The name list must be nonempty.
    pub fn from_names(names: Vec<String>) -> Result<VertexLabels> {
        if names.is_empty() {
            return Err(Error::Label("empty labeling".into()));
        }
        let mut alphabet: Vec<String> = names.clone();
        alphabet.sort();
        alphabet.dedup();
        let index: HashMap<&str, u32> = alphabet
            .iter()
            .enumerate()
            .map(|(i, s)| (s.as_str(), i as u32))
            .collect();
        let assign = names.iter().map(|s| index[s.as_str()]).collect();
        Ok(VertexLabels { alphabet, assign })
    }

    /// Build from an explicit alphabet and per-vertex indices into it.
    ///
    /// # Errors
    /// The alphabet must be nonempty with unique names and every assignment
    /// must point inside it.
    pub fn from_indices(alphabet: Vec<String>, assign: Vec<u32>) -> Result<VertexLabels> {
        if alphabet.is_empty() {
            return Err(Error::Label("empty alphabet".into()));
        }
        let mut seen = alphabet.clone();
        seen.sort();
        if seen.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Label("alphabet has repeated names".into()));
        }
        if let Some(&bad) = assign.iter().find(|&&a| a as usize >= alphabet.len()) {
            return Err(Error::Label(format!(
                "label index {bad} out of range for alphabet of {}",
                alphabet.len()
            )));
        }
        Ok(VertexLabels { alphabet, assign })
    }

    /// Number of labeled vertices.
    pub fn len(&self) -> usize {
        self.assign.len()
    }

    pub fn is_empty(&self) -> bool {
        self.assign.is_empty()
    }

    pub fn alphabet(&self) -> &[String] {
        &self.alphabet
    }

    pub fn alphabet_index(&self, name: &str) -> Option<usize> {
        self.alphabet.iter().position(|s| s == name)
    }

    /// Alphabet index of vertex `v`'s label.
    pub fn label_index(&self, v: usize) -> usize {
        self.assign[v] as usize
    }

    pub fn label_name(&self, v: usize) -> &str {
        &self.alphabet[self.assign[v] as usize]
    }

    /// Per-vertex alphabet indices, usable directly as a partition.
    pub fn assignments(&self) -> &[u32] {
        &self.assign
    }

    /// Vertices per alphabet entry.
    pub fn counts(&self) -> Vec<usize> {
        let mut c = vec![0usize; self.alphabet.len()];
        for &a in &self.assign {
            c[a as usize] += 1;
        }
        c
    }

    /// Restrict to the given original vertex ids, preserving the alphabet.
    pub(crate) fn select(&self, keep: &[u32]) -> VertexLabels {
        VertexLabels {
            alphabet: self.alphabet.clone(),
            assign: keep.iter().map(|&v| self.assign[v as usize]).collect(),
        }
    }

    /// Replace the alphabet names, keeping assignments.
    ///
    /// # Errors
    /// The replacement must match the alphabet length and stay unique.
    pub fn rename_alphabet(&self, names: &[&str]) -> Result<VertexLabels> {
        if names.len() != self.alphabet.len() {
            return Err(Error::Label(format!(
                "expected {} names, got {}",
                self.alphabet.len(),
                names.len()
            )));
        }
        VertexLabels::from_indices(
            names.iter().map(|s| s.to_string()).collect(),
            self.assign.clone(),
        )
    }
}

/// Load labels for exactly `n` vertices.
///
/// Two layouts are accepted: `vertex_id,label` lines in any order (each id
/// exactly once), or `n` bare labels in vertex order. `#` starts a comment.
///
/// # Errors
/// Count mismatch, duplicate or missing ids, malformed lines.
pub fn load_labels<P: AsRef<Path>>(path: P, n: usize) -> Result<VertexLabels> {
    let path_str = path.as_ref().display().to_string();
    let file = File::open(path.as_ref()).map_err(|source| Error::Io {
        path: path_str.clone(),
        source,
    })?;
    let reader = BufReader::new(file);

    let mut names: Vec<Option<String>> = vec![None; n];
    let mut bare: Vec<String> = Vec::new();
    let mut saw_pairs = false;
    let mut count = 0usize;
    for (idx, line) in reader.lines().enumerate() {
        let lineno = idx + 1;
        let line = line.map_err(|source| Error::Io {
            path: path_str.clone(),
            source,
        })?;
        let data = match line.find('#') {
            Some(pos) => &line[..pos],
            None => &line[..],
        }
        .trim();
        if data.is_empty() {
            continue;
        }
        count += 1;
        if count > n {
            return Err(Error::Label(format!(
                "{path_str}: more than {n} label lines"
            )));
        }
        match data.split_once(',') {
            Some((id, label)) => {
                saw_pairs = true;
                let id: usize = id.trim().parse().map_err(|_| Error::Parse {
                    path: path_str.clone(),
                    line: lineno,
                    msg: format!("bad vertex id {:?}", id.trim()),
                })?;
                if id >= n {
                    return Err(Error::Parse {
                        path: path_str.clone(),
                        line: lineno,
                        msg: format!("vertex id {id} out of range for n={n}"),
                    });
                }
                if names[id].is_some() {
                    return Err(Error::Parse {
                        path: path_str.clone(),
                        line: lineno,
                        msg: format!("duplicate vertex id {id}"),
                    });
                }
                names[id] = Some(label.trim().to_string());
            }
            None => {
                if saw_pairs {
                    return Err(Error::Parse {
                        path: path_str.clone(),
                        line: lineno,
                        msg: "mixed bare and id,label lines".into(),
                    });
                }
                bare.push(data.to_string());
            }
        }
    }
    if count != n {
        return Err(Error::Label(format!(
            "{path_str}: expected {n} labels, found {count}"
        )));
    }
    let names: Vec<String> = if saw_pairs {
        if !bare.is_empty() {
            return Err(Error::Label(format!(
                "{path_str}: mixed bare and id,label lines"
            )));
        }
        names
            .into_iter()
            .enumerate()
            .map(|(id, v)| v.ok_or_else(|| Error::Label(format!("{path_str}: missing vertex {id}"))))
            .collect::<Result<_>>()?
    } else {
        bare
    };
    VertexLabels::from_names(names)
}

/// A partition of a fine label alphabet into named coarse groups.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct MergeMap {
    /// (coarse name, fine names) in declaration order.
    groups: Vec<(String, Vec<String>)>,
}

impl MergeMap {
    /// # Arguments
    /// * `groups` - (coarse name, fine member names) pairs.
    ///
    /// # Errors
    /// Coarse names must be unique and every group nonempty; whether the
    /// groups partition a specific alphabet is checked at [`MergeMap::apply`]
    /// time.
    pub fn new(groups: Vec<(String, Vec<String>)>) -> Result<MergeMap> {
        if groups.is_empty() {
            return Err(Error::Label("merge map has no groups".into()));
        }
        let mut names: Vec<&String> = groups.iter().map(|(c, _)| c).collect();
        names.sort();
        if names.windows(2).any(|w| w[0] == w[1]) {
            return Err(Error::Label("merge map repeats a coarse name".into()));
        }
        if let Some((c, _)) = groups.iter().find(|(_, fine)| fine.is_empty()) {
            return Err(Error::Label(format!("merge group {c:?} is empty")));
        }
        Ok(MergeMap { groups })
    }

    /// Parse the compact flag syntax `"L=LG,LW;R=RG,RW"`.
    pub fn parse(spec: &str) -> Result<MergeMap> {
        let mut groups = Vec::new();
        for part in spec.split(';') {
            let part = part.trim();
            if part.is_empty() {
                continue;
            }
            let (coarse, fine) = part.split_once('=').ok_or_else(|| {
                Error::Label(format!("merge group {part:?} is not of the form NAME=a,b"))
            })?;
            let fine: Vec<String> = fine
                .split(',')
                .map(|s| s.trim().to_string())
                .filter(|s| !s.is_empty())
                .collect();
            groups.push((coarse.trim().to_string(), fine));
        }
        MergeMap::new(groups)
    }

    pub fn groups(&self) -> &[(String, Vec<String>)] {
        &self.groups
    }

    /// Relabel vertices with their coarse group names. The coarse alphabet
    /// follows group declaration order.
    ///
    /// # Errors
    /// The groups must partition the labels' alphabet exactly: every fine
    /// name mapped once, no unknown names.
    pub fn apply(&self, labels: &VertexLabels) -> Result<VertexLabels> {
        let fine_n = labels.alphabet().len();
        let mut fine_to_coarse: Vec<Option<u32>> = vec![None; fine_n];
        for (ci, (coarse, fine)) in self.groups.iter().enumerate() {
            for name in fine {
                let fi = labels.alphabet_index(name).ok_or_else(|| {
                    Error::Label(format!("merge group {coarse:?} names unknown label {name:?}"))
                })?;
                if fine_to_coarse[fi].is_some() {
                    return Err(Error::Label(format!("label {name:?} merged twice")));
                }
                fine_to_coarse[fi] = Some(ci as u32);
            }
        }
        if let Some(missing) = fine_to_coarse.iter().position(|m| m.is_none()) {
            return Err(Error::Label(format!(
                "label {:?} not covered by the merge map",
                labels.alphabet()[missing]
            )));
        }
        let assign = labels
            .assignments()
            .iter()
            .map(|&a| fine_to_coarse[a as usize].unwrap())
            .collect();
        VertexLabels::from_indices(
            self.groups.iter().map(|(c, _)| c.clone()).collect(),
            assign,
        )
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    fn write_temp(content: &str) -> std::path::PathBuf {
        use std::sync::atomic::{AtomicUsize, Ordering};
        static SEQ: AtomicUsize = AtomicUsize::new(0);
        let path = std::env::temp_dir().join(format!(
            "sgc-labels-test-{}-{}.csv",
            std::process::id(),
            SEQ.fetch_add(1, Ordering::Relaxed)
        ));
        let mut f = File::create(&path).unwrap();
        f.write_all(content.as_bytes()).unwrap();
        path
    }

    #[test]
    fn loads_id_label_pairs_in_any_order() {
        let path = write_temp("1,R\n0,L\n");
        let labels = load_labels(&path, 2).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(labels.label_name(0), "L");
        assert_eq!(labels.label_name(1), "R");
        assert_eq!(labels.alphabet(), &["L".to_string(), "R".to_string()]);
    }

    #[test]
    fn loads_bare_labels_in_vertex_order() {
        let path = write_temp("LG\nLW\nLG\n");
        let labels = load_labels(&path, 3).unwrap();
        std::fs::remove_file(&path).ok();
        assert_eq!(labels.label_name(2), "LG");
        assert_eq!(labels.counts(), vec![2, 1]);
    }

    #[test]
    fn load_rejects_count_mismatch_and_duplicates() {
        let path = write_temp("a\nb\nc\n");
        assert!(load_labels(&path, 4).is_err());
        std::fs::remove_file(&path).ok();

        let path = write_temp("0,LG\n0,LW\n");
        assert!(load_labels(&path, 2).is_err());
        std::fs::remove_file(&path).ok();

        let path = write_temp("0,LG\nbare\n");
        assert!(load_labels(&path, 2).is_err());
        std::fs::remove_file(&path).ok();
    }

    #[test]
    fn merge_map_applies_partition_of_alphabet() {
        let labels = VertexLabels::from_names(
            ["LG", "LW", "RG", "RW", "LG"]
                .iter()
                .map(|s| s.to_string())
                .collect(),
        )
        .unwrap();
        let merge = MergeMap::parse("L=LG,LW;R=RG,RW").unwrap();
        let coarse = merge.apply(&labels).unwrap();
        assert_eq!(coarse.alphabet(), &["L".to_string(), "R".to_string()]);
        assert_eq!(coarse.assignments(), &[0, 0, 1, 1, 0]);

        let gw = MergeMap::parse("G=LG,RG;W=LW,RW").unwrap();
        let coarse = gw.apply(&labels).unwrap();
        assert_eq!(coarse.assignments(), &[0, 1, 0, 1, 0]);
    }

    #[test]
    fn merge_map_must_cover_alphabet_exactly() {
        let labels = VertexLabels::from_names(
            ["a", "b", "c"].iter().map(|s| s.to_string()).collect(),
        )
        .unwrap();
        // Missing "c".
        assert!(MergeMap::parse("x=a,b").unwrap().apply(&labels).is_err());
        // Unknown name.
        assert!(MergeMap::parse("x=a,b;y=z").unwrap().apply(&labels).is_err());
        // Doubly mapped.
        assert!(MergeMap::parse("x=a,b;y=b,c")
            .unwrap()
            .apply(&labels)
            .is_err());
        // Exact cover works, singleton groups included.
        let ok = MergeMap::parse("x=a,b;y=c").unwrap().apply(&labels).unwrap();
        assert_eq!(ok.assignments(), &[0, 0, 1]);
    }

    #[test]
    fn merge_map_rejects_malformed_specs() {
        assert!(MergeMap::parse("").is_err());
        assert!(MergeMap::parse("x=").is_err());
        assert!(MergeMap::parse("x=a;x=b").is_err());
        assert!(MergeMap::parse("junk").is_err());
    }

    #[test]
    fn rename_alphabet_keeps_assignments() {
        let labels = VertexLabels::from_indices(
            vec!["b0".into(), "b1".into()],
            vec![0, 1, 1],
        )
        .unwrap();
        let renamed = labels.rename_alphabet(&["L", "R"]).unwrap();
        assert_eq!(renamed.label_name(2), "R");
        assert!(labels.rename_alphabet(&["only-one"]).is_err());
    }
}
