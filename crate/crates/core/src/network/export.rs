use std::io::{self, Write};

use super::PartnerNetwork;

/// `vessel_u,vessel_v,dyad_count`, one row per edge.
pub fn write_edge_list<W: Write>(mut w: W, network: &PartnerNetwork) -> io::Result<()> {
    writeln!(w, "vessel_u,vessel_v,dyad_count")?;
    for (u, v, c) in network.edges() {
        writeln!(w, "{},{},{}", csv_field(&network.nodes[u]), csv_field(&network.nodes[v]), c)?;
    }
    Ok(())
}

/// GraphML with node weight and layout coordinates as attributes.
pub fn write_graphml<W: Write>(mut w: W, network: &PartnerNetwork, coords: &[(f64, f64)]) -> io::Result<()> {
    writeln!(w, r#"<?xml version="1.0" encoding="UTF-8"?>"#)?;
    writeln!(w, r#"<graphml xmlns="http://graphml.graphdrawing.org/xmlns">"#)?;
    writeln!(w, r#"  <key id="weight" for="node" attr.name="weight" attr.type="int"/>"#)?;
    writeln!(w, r#"  <key id="x" for="node" attr.name="x" attr.type="double"/>"#)?;
    writeln!(w, r#"  <key id="y" for="node" attr.name="y" attr.type="double"/>"#)?;
    writeln!(w, r#"  <key id="dyads" for="edge" attr.name="dyads" attr.type="int"/>"#)?;
    writeln!(w, r#"  <graph id="partners" edgedefault="undirected">"#)?;
    for (u, id) in network.nodes.iter().enumerate() {
        writeln!(w, r#"    <node id="{}">"#, xml_escape(id))?;
        writeln!(w, r#"      <data key="weight">{}</data>"#, network.node_weight(u))?;
        if let Some(&(x, y)) = coords.get(u) {
            writeln!(w, r#"      <data key="x">{x}</data>"#)?;
            writeln!(w, r#"      <data key="y">{y}</data>"#)?;
        }
        writeln!(w, "    </node>")?;
    }
    for (u, v, c) in network.edges() {
        writeln!(
            w,
            r#"    <edge source="{}" target="{}"><data key="dyads">{c}</data></edge>"#,
            xml_escape(&network.nodes[u]),
            xml_escape(&network.nodes[v])
        )?;
    }
    writeln!(w, "  </graph>")?;
    writeln!(w, "</graphml>")
}

fn xml_escape(s: &str) -> String {
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

pub(crate) fn csv_field(s: &str) -> String {
    if s.contains([',', '"', '\n', '\r']) {
        format!("\"{}\"", s.replace('"', "\"\""))
    } else {
        s.to_string()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn edge_list_and_graphml() {
        let net = PartnerNetwork::from_edges([("A", "B", 2), ("B", "C&D", 1)]);
        let mut buf = Vec::new();
        write_edge_list(&mut buf, &net).unwrap();
        assert_eq!(String::from_utf8(buf).unwrap(), "vessel_u,vessel_v,dyad_count\nA,B,2\nB,C&D,1\n");
        let mut buf = Vec::new();
        write_graphml(&mut buf, &net, &[(0.1, 0.2), (0.5, 0.5), (0.9, 0.8)]).unwrap();
        let xml = String::from_utf8(buf).unwrap();
        assert!(xml.contains(r#"<node id="C&amp;D">"#));
        assert!(xml.contains(r#"<data key="weight">3</data>"#));
        assert!(xml.contains(r#"<edge source="A" target="B"><data key="dyads">2</data></edge>"#));
        assert_eq!(xml.matches("<node ").count(), 3);
        assert!(xml.trim_end().ends_with("</graphml>"));
    }
}
