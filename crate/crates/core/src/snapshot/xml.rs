//! Accessibility hierarchy dump (`uiautomator dump` style XML).

use super::{normalize_optional, NodeId, Rect, SnapshotError, UiNode, UiSnapshot};

/// Parses a hierarchy dump into a validated snapshot.
///
/// The document element is either `<hierarchy>` wrapping exactly one root
/// `<node>`, or a bare `<node>`. Optional `<hierarchy>` attributes
/// `snapshot-id`, `timestamp`, `width` and `height` fill the snapshot header;
/// screen size otherwise falls back to the root node's bottom-right corner.
pub fn parse_xml_dump(text: &str) -> Result<UiSnapshot, SnapshotError> {
    let doc = roxmltree::Document::parse(text).map_err(|e| {
        let pos = e.pos();
        SnapshotError::Xml { line: pos.row, column: pos.col, message: e.to_string() }
    })?;
    let top = doc.root_element();
    let (header, root_elem) = match top.tag_name().name() {
        "node" => (None, top),
        "hierarchy" => {
            let mut nodes = top.children().filter(|c| c.is_element() && c.has_tag_name("node"));
            let first = nodes.next().ok_or_else(|| SnapshotError::Structure("no root node".into()))?;
            if nodes.next().is_some() {
                return Err(SnapshotError::Structure("multiple roots under <hierarchy>".into()));
            }
            (Some(top), first)
        }
        other => {
            return Err(SnapshotError::Structure(format!(
                "expected <hierarchy> or <node> document element, found <{other}>"
            )))
        }
    };

    let mut nodes = Vec::new();
    collect(root_elem, None, "/node[0]".to_string(), &mut nodes)?;

    let root_bounds = nodes[0].bounds;
    let header_int = |name: &str| -> Result<Option<i64>, SnapshotError> {
        match header.and_then(|h| h.attribute(name)) {
            None | Some("") => Ok(None),
            Some(v) => v.trim().parse::<i64>().map(Some).map_err(|_| SnapshotError::Field {
                path: "/hierarchy".into(),
                field: name.into(),
                message: format!("expected an integer, found {v:?}"),
            }),
        }
    };
    let width = header_int("width")?.unwrap_or(root_bounds.right.max(0) as i64);
    let height = header_int("height")?.unwrap_or(root_bounds.bottom.max(0) as i64);
    let timestamp = header_int("timestamp")?.unwrap_or(0);
    let snapshot_id = header
        .and_then(|h| h.attribute("snapshot-id"))
        .filter(|s| !s.is_empty())
        .unwrap_or("xml-dump")
        .to_string();

    UiSnapshot::from_nodes(snapshot_id, timestamp, width.max(0) as u32, height.max(0) as u32, nodes)
}

fn collect(
    elem: roxmltree::Node<'_, '_>,
    parent: Option<NodeId>,
    path: String,
    out: &mut Vec<UiNode>,
) -> Result<NodeId, SnapshotError> {
    let id = NodeId(out.len() as u32);
    let attr = |name: &str| elem.attribute(name).map(str::to_string);
    let flag = |name: &str| -> Result<bool, SnapshotError> {
        match elem.attribute(name) {
            None | Some("") | Some("false") => Ok(false),
            Some("true") => Ok(true),
            Some(other) => Err(SnapshotError::Field {
                path: path.clone(),
                field: name.into(),
                message: format!("expected true/false, found {other:?}"),
            }),
        }
    };
    let bounds_text = elem.attribute("bounds").ok_or_else(|| SnapshotError::Field {
        path: path.clone(),
        field: "bounds".into(),
        message: "attribute missing".into(),
    })?;
    let bounds = parse_bounds(bounds_text).map_err(|message| SnapshotError::Field {
        path: path.clone(),
        field: "bounds".into(),
        message,
    })?;

    let mut node = UiNode {
        id,
        package_name: attr("package").unwrap_or_default(),
        class_name: attr("class").unwrap_or_default(),
        text: attr("text"),
        content_description: attr("content-desc"),
        view_id: attr("resource-id"),
        clickable: flag("clickable")?,
        editable: flag("editable")?,
        scrollable: flag("scrollable")?,
        bounds,
        parent,
        children: Vec::new(),
    };
    normalize_optional(&mut node.text);
    normalize_optional(&mut node.content_description);
    normalize_optional(&mut node.view_id);
    out.push(node);

    let mut children = Vec::new();
    for (i, child) in elem.children().filter(|c| c.is_element() && c.has_tag_name("node")).enumerate() {
        let child_id = collect(child, Some(id), format!("{path}/node[{i}]"), out)?;
        children.push(child_id);
    }
    out[id.0 as usize].children = children;
    Ok(id)
}

/// Parses exactly `[x1,y1][x2,y2]` with non-negative integers.
pub(crate) fn parse_bounds(text: &str) -> Result<Rect, String> {
    let err = || format!("expected [x1,y1][x2,y2], found {text:?}");
    let inner = text.strip_prefix('[').and_then(|t| t.strip_suffix(']')).ok_or_else(err)?;
    let (first, second) = inner.split_once("][").ok_or_else(err)?;
    let pair = |s: &str| -> Result<(i32, i32), String> {
        let (a, b) = s.split_once(',').ok_or_else(err)?;
        let num = |v: &str| -> Result<i32, String> {
            if v.is_empty() || !v.bytes().all(|b| b.is_ascii_digit()) {
                return Err(err());
            }
            v.parse::<i32>().map_err(|_| err())
        };
        Ok((num(a)?, num(b)?))
    };
    let (left, top) = pair(first)?;
    let (right, bottom) = pair(second)?;
    let rect = Rect::new(left, top, right, bottom);
    if !rect.is_valid() {
        return Err(format!("{text:?} has left > right or top > bottom"));
    }
    Ok(rect)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn walkthrough_bounds() {
        let xml = r#"<hierarchy><node class="android.widget.TextView" package="com.instagram.android" text="apple" bounds="[10,100][200,150]"/></hierarchy>"#;
        let s = parse_xml_dump(xml).unwrap();
        assert_eq!(s.len(), 1);
        assert_eq!(s.root().bounds, Rect::new(10, 100, 200, 150));
        assert_eq!(s.root().text.as_deref(), Some("apple"));
    }

    #[test]
    fn empty_hierarchy_has_no_root() {
        let err = parse_xml_dump("<hierarchy rotation=\"0\"></hierarchy>").unwrap_err();
        assert_eq!(err, SnapshotError::Structure("no root node".into()));
    }

    #[test]
    fn two_top_level_nodes_rejected() {
        let xml = r#"<hierarchy><node bounds="[0,0][1,1]"/><node bounds="[0,0][1,1]"/></hierarchy>"#;
        assert!(matches!(parse_xml_dump(xml), Err(SnapshotError::Structure(_))));
    }

    #[test]
    fn malformed_xml_has_position() {
        let err = parse_xml_dump("<hierarchy>\n  <node bounds=\"[0,0][1,1]\">\n</hierarchy>").unwrap_err();
        match err {
            SnapshotError::Xml { line, .. } => assert_eq!(line, 3),
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bad_bounds_names_node_path() {
        let xml = r#"<hierarchy><node bounds="[0,0][9,9]"><node bounds="[0,0][9,9]"/><node bounds="[1,2]"/></node></hierarchy>"#;
        match parse_xml_dump(xml).unwrap_err() {
            SnapshotError::Field { path, field, .. } => {
                assert_eq!(path, "/node[0]/node[1]");
                assert_eq!(field, "bounds");
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn bounds_grammar_is_strict() {
        assert!(parse_bounds("[0,0][10,10]").is_ok());
        for bad in ["[0,0][10,10", "[-1,0][10,10]", "[0, 0][10,10]", "[0,0]-[10,10]", "[a,0][1,1]", "[5,0][1,1]"] {
            assert!(parse_bounds(bad).is_err(), "{bad}");
        }
    }

    #[test]
    fn header_attributes_read() {
        let xml = r#"<hierarchy snapshot-id="abc" timestamp="1234" width="1080" height="2400"><node bounds="[0,0][5,5]" text=""/></hierarchy>"#;
        let s = parse_xml_dump(xml).unwrap();
        assert_eq!((s.snapshot_id.as_str(), s.timestamp, s.screen_width, s.screen_height), ("abc", 1234, 1080, 2400));
        assert_eq!(s.root().text, None);
    }

    #[test]
    fn deterministic_ids() {
        let xml = r#"<hierarchy><node bounds="[0,0][9,9]"><node bounds="[0,0][9,9]"><node bounds="[0,0][1,1]"/></node><node bounds="[0,0][9,9]"/></node></hierarchy>"#;
        let a = parse_xml_dump(xml).unwrap();
        let b = parse_xml_dump(xml).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.preorder(), vec![NodeId(0), NodeId(1), NodeId(2), NodeId(3)]);
        assert_eq!(a.node(NodeId(3)).unwrap().parent, Some(NodeId(0)));
    }
}
