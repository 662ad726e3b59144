//! Text formats: TSV edge lists, a GFA subset (S/L records), and FASTA.

use std::collections::HashMap;
use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use super::genome::{Base, GenomeGraph, Read, ReadBatch, DEFAULT_SHORT_THRESHOLD};
use super::{Edge, WeightedGraph};
use crate::error::{Error, Result};

fn parse_err(line: usize, msg: impl Into<String>) -> Error {
    Error::Parse { line, msg: msg.into() }
}

/// Parses `src<TAB>dst<TAB>weight` lines. `#` starts a comment; a leading
/// `# n=<count> directed=<bool>` comment fixes the vertex count and flag.
pub fn parse_edge_list(text: &str) -> Result<WeightedGraph> {
    let mut n_hint: Option<usize> = None;
    let mut directed = true;
    let mut edges = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(comment) = line.strip_prefix('#') {
            for tok in comment.split_whitespace() {
                if let Some(v) = tok.strip_prefix("n=") {
                    n_hint = Some(v.parse().map_err(|_| parse_err(idx + 1, "bad n= header"))?);
                } else if let Some(v) = tok.strip_prefix("directed=") {
                    directed = v.parse().map_err(|_| parse_err(idx + 1, "bad directed= header"))?;
                }
            }
            continue;
        }
        let fields: Vec<&str> = line.split_whitespace().collect();
        if fields.len() != 3 {
            return Err(parse_err(idx + 1, format!("expected 3 fields, found {}", fields.len())));
        }
        let num = |s: &str| s.parse::<u32>().map_err(|_| parse_err(idx + 1, format!("not an integer: {s}")));
        edges.push(Edge::new(num(fields[0])?, num(fields[1])?, num(fields[2])?));
    }
    let max_id = edges.iter().map(|e| e.src.max(e.dst) as usize + 1).max().unwrap_or(0);
    let n = n_hint.unwrap_or(max_id);
    WeightedGraph::new(n, edges, directed)
}

pub fn write_edge_list(g: &WeightedGraph) -> String {
    let mut out = String::with_capacity(g.edge_count() * 16 + 32);
    let _ = writeln!(out, "# n={} directed={}", g.n(), g.is_directed());
    for e in g.edges() {
        let _ = writeln!(out, "{}\t{}\t{}", e.src, e.dst, e.w);
    }
    out
}

pub fn load_edge_list(path: impl AsRef<Path>) -> Result<WeightedGraph> {
    parse_edge_list(&fs::read_to_string(path)?)
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Segment {
    pub name: String,
    pub seq: String,
}

/// The supported GFA subset: segments and forward-strand links.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Gfa {
    pub segments: Vec<Segment>,
    /// Links as indices into `segments`.
    pub links: Vec<(usize, usize)>,
}

impl Gfa {
    /// Appends a segment named by its 1-based position; returns its index.
    pub fn push_segment(&mut self, seq: &str) -> usize {
        let idx = self.segments.len();
        self.segments.push(Segment { name: (idx + 1).to_string(), seq: seq.to_string() });
        idx
    }

    pub fn parse(text: &str) -> Result<Gfa> {
        let mut gfa = Gfa::default();
        let mut by_name: HashMap<String, usize> = HashMap::new();
        let mut pending: Vec<(usize, String, String)> = Vec::new();
        for (idx, raw) in text.lines().enumerate() {
            let line_no = idx + 1;
            let line = raw.trim_end();
            if line.trim().is_empty() {
                continue;
            }
            let f: Vec<&str> = line.split_whitespace().collect();
            match f[0] {
                "S" => {
                    if f.len() != 3 {
                        return Err(parse_err(line_no, "S record needs exactly <id> <sequence>"));
                    }
                    if f[2].is_empty() || f[2] == "*" {
                        return Err(parse_err(line_no, "segment sequence must be present"));
                    }
                    if by_name.insert(f[1].to_string(), gfa.segments.len()).is_some() {
                        return Err(parse_err(line_no, format!("duplicate segment {}", f[1])));
                    }
                    gfa.segments.push(Segment { name: f[1].to_string(), seq: f[2].to_string() });
                }
                "L" => {
                    if f.len() != 5 && !(f.len() == 6 && (f[5] == "*" || f[5] == "0M")) {
                        return Err(parse_err(line_no, "L record must be `L <from> + <to> +`"));
                    }
                    if f[2] != "+" || f[4] != "+" {
                        return Err(parse_err(line_no, "only forward (+) orientations are supported"));
                    }
                    pending.push((line_no, f[1].to_string(), f[3].to_string()));
                }
                other => {
                    return Err(parse_err(line_no, format!("unsupported record type {other:?}")));
                }
            }
        }
        for (line_no, from, to) in pending {
            let a = *by_name.get(&from).ok_or_else(|| parse_err(line_no, format!("unknown segment {from}")))?;
            let b = *by_name.get(&to).ok_or_else(|| parse_err(line_no, format!("unknown segment {to}")))?;
            gfa.links.push((a, b));
        }
        Ok(gfa)
    }

    pub fn write(&self) -> String {
        let mut out = String::new();
        for s in &self.segments {
            let _ = writeln!(out, "S\t{}\t{}", s.name, s.seq);
        }
        for &(a, b) in &self.links {
            let _ = writeln!(out, "L\t{}\t+\t{}\t+", self.segments[a].name, self.segments[b].name);
        }
        out
    }

    /// Expands every segment into a chain of per-base nodes (in file order)
    /// and joins chains along links, last base to first base.
    pub fn to_genome_graph(&self) -> Result<GenomeGraph> {
        let mut bases = Vec::new();
        let mut first = Vec::with_capacity(self.segments.len());
        let mut last = Vec::with_capacity(self.segments.len());
        let mut preds: Vec<Vec<u32>> = Vec::new();
        for s in &self.segments {
            let start = bases.len() as u32;
            for (k, ch) in s.seq.chars().enumerate() {
                bases.push(Base::from_char(ch)?);
                preds.push(if k == 0 { Vec::new() } else { vec![start + k as u32 - 1] });
            }
            first.push(start);
            last.push(bases.len() as u32 - 1);
        }
        for &(a, b) in &self.links {
            preds[first[b] as usize].push(last[a]);
        }
        GenomeGraph::new(bases, preds)
    }
}

pub fn load_genome_graph(path: impl AsRef<Path>) -> Result<GenomeGraph> {
    Gfa::parse(&fs::read_to_string(path)?)?.to_genome_graph()
}

/// Parses FASTA; the record id is the first whitespace token after `>`.
pub fn parse_fasta(text: &str) -> Result<Vec<Read>> {
    let mut reads: Vec<Read> = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() {
            continue;
        }
        if let Some(header) = line.strip_prefix('>') {
            let id = header.split_whitespace().next().unwrap_or("").to_string();
            if id.is_empty() {
                return Err(parse_err(idx + 1, "empty FASTA id"));
            }
            reads.push(Read::new(id, Vec::new()));
        } else {
            let cur = reads.last_mut().ok_or_else(|| parse_err(idx + 1, "sequence before first header"))?;
            for ch in line.chars() {
                cur.seq.push(Base::from_char(ch)?.to_char() as u8);
            }
        }
    }
    Ok(reads)
}

pub fn write_fasta<'a>(records: impl IntoIterator<Item = (&'a str, &'a [u8])>) -> String {
    let mut out = String::new();
    for (id, seq) in records {
        let _ = writeln!(out, ">{id}");
        for chunk in seq.chunks(80) {
            out.push_str(std::str::from_utf8(chunk).unwrap_or(""));
            out.push('\n');
        }
    }
    out
}

pub fn load_reads(path: impl AsRef<Path>) -> Result<ReadBatch> {
    Ok(ReadBatch::new(parse_fasta(&fs::read_to_string(path)?)?, DEFAULT_SHORT_THRESHOLD))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn single_segment_is_chain() {
        let g = Gfa::parse("S\t1\tACGT\n").unwrap().to_genome_graph().unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.preds(0), &[] as &[u32]);
        assert_eq!(g.preds(3), &[2]);
    }

    #[test]
    fn linked_segments_concatenate() {
        let g = Gfa::parse("S 1 AC\nS 2 GT\nL 1 + 2 +\n").unwrap().to_genome_graph().unwrap();
        assert_eq!(g.len(), 4);
        assert_eq!(g.preds(2), &[1]);
        assert_eq!(g.edge_count(), 3);
    }

    #[test]
    fn bubble_join_has_two_preds() {
        let text = "S 1 A\nS 2 C\nS 3 G\nS 4 T\nL 1 + 2 +\nL 1 + 3 +\nL 2 + 4 +\nL 3 + 4 +\n";
        let g = Gfa::parse(text).unwrap().to_genome_graph().unwrap();
        assert_eq!(g.preds(3), &[1, 2]);
        assert_eq!(g.topo_order(), &[0, 1, 2, 3]);
    }

    #[test]
    fn cycles_and_bad_alphabet_rejected() {
        let cyc = Gfa::parse("S 1 A\nS 2 C\nL 1 + 2 +\nL 2 + 1 +\n").unwrap();
        assert!(matches!(cyc.to_genome_graph(), Err(Error::Cycle { .. })));
        let bad = Gfa::parse("S 1 AXG\n").unwrap();
        assert!(matches!(bad.to_genome_graph(), Err(Error::Alphabet { ch: 'X' })));
        assert!(Gfa::parse("H\tVN:Z:1.0\n").is_err());
        assert!(Gfa::parse("S 1 A\nS 2 C\nL 1 + 2 -\n").is_err());
    }

    #[test]
    fn generated_genome_reloads() {
        let (gfa, reference) = crate::graph::gen_genome(2000, 0.02, 4).unwrap();
        let again = Gfa::parse(&gfa.write()).unwrap();
        assert_eq!(again, gfa);
        let g = again.to_genome_graph().unwrap();
        let total: usize = gfa.segments.iter().map(|s| s.seq.len()).sum();
        assert_eq!(g.len(), total);
        assert!(g.len() >= reference.len());
        assert_eq!(g.longest_path_len(), reference.len());
    }

    #[test]
    fn edge_list_round_trip_keeps_isolated_vertices() {
        let g = WeightedGraph::new(5, vec![Edge::new(0, 1, 3), Edge::new(2, 1, 9)], true).unwrap();
        let back = parse_edge_list(&write_edge_list(&g)).unwrap();
        assert_eq!(back, g);
        let plain = parse_edge_list("# comment\n0\t1\t4\n\n1\t2\t5\n").unwrap();
        assert_eq!(plain.n(), 3);
        assert!(parse_edge_list("0\t1\n").is_err());
    }

    #[test]
    fn fasta_multiline() {
        let reads = parse_fasta(">r1 desc\nACG\nT\n>r2\nnn\n").unwrap();
        assert_eq!(reads[0].id, "r1");
        assert_eq!(reads[0].seq, b"ACGT");
        assert_eq!(reads[1].seq, b"NN");
        let text = write_fasta(reads.iter().map(|r| (r.id.as_str(), r.seq.as_slice())));
        assert_eq!(parse_fasta(&text).unwrap(), reads);
    }
}
