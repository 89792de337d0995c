//! Edge-list CSV and GraphML writers.

use std::io::Write;

use super::network::SimilarityNetwork;
use crate::error::{Error, Result};

/// `source,target,weight` with user ids as endpoints.
pub fn write_edge_list<W: Write>(g: &SimilarityNetwork, out: W) -> Result<()> {
    let mut w = csv::Writer::from_writer(out);
    w.write_record(["source", "target", "weight"])?;
    for e in g.edges() {
        w.write_record([
            g.nodes()[e.source as usize].as_str(),
            g.nodes()[e.target as usize].as_str(),
            &format!("{}", e.weight),
        ])?;
    }
    w.flush().map_err(|e| Error::io("<edge list>", e))
}

fn escape_xml(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&apos;"),
            c => out.push(c),
        }
    }
    out
}

/// GraphML with a `weight` edge attribute and optional per-node numeric
/// attributes (for example centrality scores), each given as `(name, values)`.
pub fn write_graphml<W: Write>(
    g: &SimilarityNetwork,
    node_attrs: &[(&str, &[f64])],
    mut out: W,
) -> Result<()> {
    let io = |e| Error::io("<graphml>", e);
    for (name, values) in node_attrs {
        if values.len() != g.n_nodes() {
            return Err(Error::invalid(format!(
                "node attribute {name} has {} values for {} nodes",
                values.len(),
                g.n_nodes()
            )));
        }
    }
    let mut s = String::new();
    s.push_str("<?xml version=\"1.0\" encoding=\"UTF-8\"?>\n");
    s.push_str("<graphml xmlns=\"http://graphml.graphdrawing.org/xmlns\">\n");
    s.push_str("  <key id=\"weight\" for=\"edge\" attr.name=\"weight\" attr.type=\"double\"/>\n");
    for (k, (name, _)) in node_attrs.iter().enumerate() {
        s.push_str(&format!(
            "  <key id=\"n{k}\" for=\"node\" attr.name=\"{}\" attr.type=\"double\"/>\n",
            escape_xml(name)
        ));
    }
    s.push_str("  <graph id=\"similarity\" edgedefault=\"undirected\">\n");
    out.write_all(s.as_bytes()).map_err(io)?;

    for (i, node) in g.nodes().iter().enumerate() {
        let mut line = format!("    <node id=\"{}\"", escape_xml(node));
        if node_attrs.is_empty() {
            line.push_str("/>\n");
        } else {
            line.push_str(">\n");
            for (k, (_, values)) in node_attrs.iter().enumerate() {
                line.push_str(&format!("      <data key=\"n{k}\">{}</data>\n", values[i]));
            }
            line.push_str("    </node>\n");
        }
        out.write_all(line.as_bytes()).map_err(io)?;
    }
    for (k, e) in g.edges().iter().enumerate() {
        let line = format!(
            "    <edge id=\"e{k}\" source=\"{}\" target=\"{}\"><data key=\"weight\">{}</data></edge>\n",
            escape_xml(&g.nodes()[e.source as usize]),
            escape_xml(&g.nodes()[e.target as usize]),
            e.weight
        );
        out.write_all(line.as_bytes()).map_err(io)?;
    }
    out.write_all(b"  </graph>\n</graphml>\n").map_err(io)
}
