use std::collections::BTreeSet;
use std::fmt::Write as _;

use crate::{Error, Result};

/// Connectivity of a `K`-pair interference network plus receiver caches.
///
/// Indices are zero-based here; the text format is one-based. A link `(i, j)`
/// means receiver `i` hears transmitter `j`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NetworkTopology {
    users: usize,
    links: BTreeSet<(usize, usize)>,
    caches: Vec<BTreeSet<usize>>,
}

impl NetworkTopology {
    pub fn new(users: usize, links: impl IntoIterator<Item = (usize, usize)>) -> Result<Self> {
        if users == 0 {
            return Err(Error::invalid("a topology needs at least one user pair"));
        }
        let mut set = BTreeSet::new();
        for (i, j) in links {
            if i >= users || j >= users {
                return Err(Error::invalid(format!("link ({i}, {j}) outside {users} users")));
            }
            if i == j {
                return Err(Error::invalid(format!("self link ({i}, {i})")));
            }
            set.insert((i, j));
        }
        Ok(NetworkTopology { users, links: set, caches: vec![BTreeSet::new(); users] })
    }

    /// Every receiver hears every other transmitter.
    pub fn fully_connected(users: usize) -> Result<Self> {
        let links = (0..users).flat_map(|i| (0..users).filter(move |&j| j != i).map(move |j| (i, j)));
        Self::new(users, links)
    }

    /// Replaces receiver `k`'s cache with `messages`.
    pub fn with_cache(mut self, k: usize, messages: impl IntoIterator<Item = usize>) -> Result<Self> {
        if k >= self.users {
            return Err(Error::invalid(format!("cache for unknown receiver {k}")));
        }
        let mut set = BTreeSet::new();
        for j in messages {
            if j >= self.users {
                return Err(Error::invalid(format!("receiver {k} caches unknown message {j}")));
            }
            if j == k {
                return Err(Error::invalid(format!("receiver {k} caches its own message")));
            }
            set.insert(j);
        }
        self.caches[k] = set;
        Ok(self)
    }

    pub fn users(&self) -> usize {
        self.users
    }

    pub fn links(&self) -> &BTreeSet<(usize, usize)> {
        &self.links
    }

    pub fn cache(&self, k: usize) -> &BTreeSet<usize> {
        &self.caches[k]
    }

    pub fn is_connected(&self, i: usize, j: usize) -> bool {
        self.links.contains(&(i, j))
    }

    /// `K` on the first line, then `conn i j` per link and `cache k j1 j2 ...`
    /// per nonempty cache, all one-based. `#` starts a comment line.
    pub fn to_text(&self) -> String {
        let mut out = format!("{}\n", self.users);
        for &(i, j) in &self.links {
            let _ = writeln!(out, "conn {} {}", i + 1, j + 1);
        }
        for (k, cache) in self.caches.iter().enumerate().filter(|(_, c)| !c.is_empty()) {
            let _ = write!(out, "cache {}", k + 1);
            for j in cache {
                let _ = write!(out, " {}", j + 1);
            }
            out.push('\n');
        }
        out
    }

    pub fn from_text(text: &str) -> Result<Self> {
        let mut lines = text
            .lines()
            .enumerate()
            .map(|(i, l)| (i + 1, l.trim()))
            .filter(|(_, l)| !l.is_empty() && !l.starts_with('#'));
        let (ln, header) = lines.next().ok_or_else(|| Error::parse(1, "empty topology"))?;
        let users: usize = header
            .parse()
            .map_err(|_| Error::parse(ln, format!("expected user count, found `{header}`")))?;
        let mut links = Vec::new();
        let mut caches = Vec::new();
        for (ln, line) in lines {
            let mut toks = line.split_whitespace();
            let keyword = toks.next().unwrap_or_default();
            let idx: Vec<usize> = toks
                .map(|t| match t.parse::<usize>() {
                    Ok(v) if v >= 1 => Ok(v - 1),
                    _ => Err(Error::parse(ln, format!("bad one-based index `{t}`"))),
                })
                .collect::<Result<_>>()?;
            match (keyword, idx.as_slice()) {
                ("conn", &[i, j]) => links.push((i, j)),
                ("conn", _) => return Err(Error::parse(ln, "expected `conn i j`")),
                ("cache", [k, rest @ ..]) => caches.push((ln, *k, rest.to_vec())),
                ("cache", []) => return Err(Error::parse(ln, "expected `cache k j1 j2 ...`")),
                (other, _) => return Err(Error::parse(ln, format!("unknown directive `{other}`"))),
            }
        }
        let mut topo = Self::new(users, links)?;
        for (ln, k, msgs) in caches {
            topo = topo.with_cache(k, msgs).map_err(|e| Error::parse(ln, e.to_string()))?;
        }
        Ok(topo)
    }
}
