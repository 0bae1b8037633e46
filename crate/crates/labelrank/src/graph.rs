//! Undirected simple graphs in CSR form: edge-list ingestion, selfloop
//! preprocessing, and sorted neighbor access.

use std::borrow::Cow;
use std::collections::HashMap;
use std::io::{self, BufRead, Write};

use thiserror::Error;

/// Errors from edge-list parsing.
#[derive(Debug, Error)]
pub enum GraphError {
    /// A content line did not hold exactly two usable node tokens.
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    /// The input held no edges (only blank or comment lines, or nothing).
    #[error("edge list contains no edges")]
    Empty,
    #[error(transparent)]
    Io(#[from] io::Error),
}

/// Options for [`Graph::load_edge_list`].
#[derive(Debug, Clone)]
pub struct LoadOptions {
    /// Lines whose first non-whitespace characters match this prefix are
    /// skipped. Defaults to `"#"`.
    pub comment_prefix: String,
    /// Token separator. `None` (the default) splits on any run of
    /// whitespace; `Some(c)` splits on exactly that character, trimming
    /// whitespace around each token.
    pub separator: Option<char>,
}

impl Default for LoadOptions {
    fn default() -> Self {
        LoadOptions { comment_prefix: "#".to_string(), separator: None }
    }
}

/// An immutable undirected graph with CSR neighbor storage.
///
/// Neighbor lists are sorted ascending and duplicate-free. `edge_count`
/// counts each undirected edge once, and each selfloop once, so
/// `sum(degree) = 2 * non_loop_edges + loops`. Node ids are dense internal
/// indices in `[0, node_count)`; when the graph was loaded from a file the
/// original string ids are retained and restored in all output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Graph {
    node_count: usize,
    edge_count: usize,
    neighbor_offsets: Vec<usize>,
    neighbor_ids: Vec<u32>,
    node_names: Option<Vec<String>>,
}

impl Graph {
    /// Reads a whitespace- or character-separated edge list as an undirected,
    /// unweighted simple graph.
    ///
    /// Duplicate edges (in either direction) collapse to one; blank lines and
    /// comment lines are skipped; external node ids may be arbitrary tokens
    /// and are mapped to dense internal ids in order of first appearance.
    /// Selfloops present in the input are kept. No selfloops are added here;
    /// that is [`Graph::add_selfloops`]'s job.
    ///
    /// # Errors
    ///
    /// A content line with one token, more than two tokens (weighted edge
    /// lists are rejected rather than silently truncated), or an empty token
    /// yields [`GraphError::Parse`] with its line number. Input containing no
    /// edges at all yields [`GraphError::Empty`].
    pub fn load_edge_list<R: BufRead>(reader: R, options: &LoadOptions) -> Result<Graph, GraphError> {
        let mut ids: HashMap<String, u32> = HashMap::new();
        let mut names: Vec<String> = Vec::new();
        let mut edges: Vec<(u32, u32)> = Vec::new();

        let intern = |token: &str, names: &mut Vec<String>, ids: &mut HashMap<String, u32>| -> u32 {
            if let Some(&id) = ids.get(token) {
                return id;
            }
            let id = names.len() as u32;
            names.push(token.to_string());
            ids.insert(token.to_string(), id);
            id
        };

        for (index, line) in reader.lines().enumerate() {
            let line = line?;
            let number = index + 1;
            let trimmed = line.trim();
            if trimmed.is_empty() || trimmed.starts_with(&options.comment_prefix) {
                continue;
            }
            let tokens: Vec<&str> = match options.separator {
                None => trimmed.split_whitespace().collect(),
                Some(c) => trimmed.split(c).map(str::trim).collect(),
            };
            if tokens.len() != 2 {
                let mut message = format!("expected 2 node tokens, found {}", tokens.len());
                if tokens.len() > 2 {
                    message.push_str(" (weighted edge lists are not supported)");
                }
                return Err(GraphError::Parse { line: number, message });
            }
            if tokens.iter().any(|t| t.is_empty()) {
                return Err(GraphError::Parse { line: number, message: "empty node token".to_string() });
            }
            let a = intern(tokens[0], &mut names, &mut ids);
            let b = intern(tokens[1], &mut names, &mut ids);
            edges.push((a.min(b), a.max(b)));
        }

        if edges.is_empty() {
            return Err(GraphError::Empty);
        }
        Ok(Graph::build(names.len(), edges, Some(names)))
    }

    /// Builds a graph from explicit edges over nodes `0..node_count`.
    /// Duplicates and direction collapse as in [`Graph::load_edge_list`];
    /// nodes not mentioned in any edge are kept as isolated nodes.
    ///
    /// # Panics
    ///
    /// If an endpoint is `>= node_count`.
    pub fn from_edges(node_count: usize, edges: &[(u32, u32)]) -> Graph {
        for &(a, b) in edges {
            assert!(
                (a as usize) < node_count && (b as usize) < node_count,
                "edge ({a}, {b}) out of range for {node_count} nodes"
            );
        }
        let normalized: Vec<(u32, u32)> = edges.iter().map(|&(a, b)| (a.min(b), a.max(b))).collect();
        Graph::build(node_count, normalized, None)
    }

    /// `normalized` holds (min, max) pairs, possibly with duplicates.
    fn build(node_count: usize, mut normalized: Vec<(u32, u32)>, node_names: Option<Vec<String>>) -> Graph {
        normalized.sort_unstable();
        normalized.dedup();

        let mut counts = vec![0usize; node_count + 1];
        for &(a, b) in &normalized {
            counts[a as usize + 1] += 1;
            if a != b {
                counts[b as usize + 1] += 1;
            }
        }
        for i in 0..node_count {
            counts[i + 1] += counts[i];
        }
        let neighbor_offsets = counts;

        let mut cursor = neighbor_offsets.clone();
        let mut neighbor_ids = vec![0u32; neighbor_offsets[node_count]];
        // Edges are sorted by (min, max), so each row receives its smaller
        // partners first and in order, leaving every row sorted ascending.
        for &(a, b) in &normalized {
            neighbor_ids[cursor[a as usize]] = b;
            cursor[a as usize] += 1;
            if a != b {
                neighbor_ids[cursor[b as usize]] = a;
                cursor[b as usize] += 1;
            }
        }
        debug_assert!((0..node_count).all(|i| {
            let row = &neighbor_ids[neighbor_offsets[i]..neighbor_offsets[i + 1]];
            row.windows(2).all(|w| w[0] < w[1])
        }));

        Graph {
            node_count,
            edge_count: normalized.len(),
            neighbor_offsets,
            neighbor_ids,
            node_names,
        }
    }

    /// Returns a copy with a selfloop on every node. Idempotent: existing
    /// selfloops are preserved, not duplicated.
    pub fn add_selfloops(&self) -> Graph {
        let mut neighbor_offsets = Vec::with_capacity(self.node_count + 1);
        let mut neighbor_ids = Vec::with_capacity(self.neighbor_ids.len() + self.node_count);
        let mut added = 0usize;
        neighbor_offsets.push(0);
        for i in 0..self.node_count {
            let row = self.neighbors(i as u32);
            match row.binary_search(&(i as u32)) {
                Ok(_) => neighbor_ids.extend_from_slice(row),
                Err(pos) => {
                    neighbor_ids.extend_from_slice(&row[..pos]);
                    neighbor_ids.push(i as u32);
                    neighbor_ids.extend_from_slice(&row[pos..]);
                    added += 1;
                }
            }
            neighbor_offsets.push(neighbor_ids.len());
        }
        Graph {
            node_count: self.node_count,
            edge_count: self.edge_count + added,
            neighbor_offsets,
            neighbor_ids,
            node_names: self.node_names.clone(),
        }
    }

    /// True when every node has itself as a neighbor.
    pub fn has_all_selfloops(&self) -> bool {
        (0..self.node_count).all(|i| self.has_selfloop(i as u32))
    }

    /// True when node `i` has itself as a neighbor.
    pub fn has_selfloop(&self, i: u32) -> bool {
        self.neighbors(i).binary_search(&i).is_ok()
    }

    /// The neighbors of `i`, sorted ascending and duplicate-free. After
    /// [`Graph::add_selfloops`] the list includes `i` itself.
    ///
    /// # Panics
    ///
    /// If `i >= node_count`.
    pub fn neighbors(&self, i: u32) -> &[u32] {
        let i = i as usize;
        assert!(i < self.node_count, "node id {i} out of range for {} nodes", self.node_count);
        &self.neighbor_ids[self.neighbor_offsets[i]..self.neighbor_offsets[i + 1]]
    }

    /// The degree `k_i = |Nb(i)|`; a selfloop contributes 1.
    ///
    /// # Panics
    ///
    /// If `i >= node_count`.
    pub fn degree(&self, i: u32) -> usize {
        self.neighbors(i).len()
    }

    /// Number of nodes `n`.
    pub fn node_count(&self) -> usize {
        self.node_count
    }

    /// Number of undirected edges `m`, counting each selfloop once.
    pub fn edge_count(&self) -> usize {
        self.edge_count
    }

    /// The external id of node `i`, or its index rendered as text when the
    /// graph was not loaded from a named source.
    pub fn node_name(&self, i: u32) -> Cow<'_, str> {
        match &self.node_names {
            Some(names) => Cow::Borrowed(names[i as usize].as_str()),
            None => Cow::Owned(i.to_string()),
        }
    }

    /// Looks up a node by its external id.
    pub fn node_by_name(&self, name: &str) -> Option<u32> {
        match &self.node_names {
            Some(names) => names.iter().position(|n| n == name).map(|i| i as u32),
            None => name.parse::<u32>().ok().filter(|&i| (i as usize) < self.node_count),
        }
    }

    /// Writes the graph back as an edge list, one `a b` line per undirected
    /// edge (selfloops as `a a`), using external ids. Isolated nodes cannot
    /// be represented in edge-list form and are omitted.
    pub fn write_edge_list<W: Write>(&self, writer: &mut W) -> io::Result<()> {
        for i in 0..self.node_count as u32 {
            for &j in self.neighbors(i) {
                if j >= i {
                    writeln!(writer, "{} {}", self.node_name(i), self.node_name(j))?;
                }
            }
        }
        Ok(())
    }
}
