use std::collections::BTreeSet;

use roxmltree::{Document, Node};

use super::time::parse_timestamp;
use super::ParseReport;
use crate::error::{Error, Result};
use crate::log::{build_log, Event, EventLog};

/// Lifecycle transitions kept when no filter is given.
pub const DEFAULT_LIFECYCLE: &[&str] = &["complete"];

fn child<'a, 'i>(node: Node<'a, 'i>, name: &str) -> Option<Node<'a, 'i>> {
    node.children().find(|n| n.has_tag_name(name))
}

fn child_text<'a>(node: Node<'a, '_>, name: &str) -> Option<&'a str> {
    child(node, name)
        .and_then(|n| n.text())
        .map(str::trim)
        .filter(|s| !s.is_empty())
}

/// Parses the MXML subset `WorkflowLog > Process > ProcessInstance[id] >
/// AuditTrailEntry { WorkflowModelElement, EventType, Timestamp }`.
///
/// Entries whose `EventType` is outside `lifecycle` (default `{"complete"}`)
/// are skipped silently; an entry without `EventType` counts as `complete`.
/// Data, Source and attribute sections are ignored.
pub fn parse_mxml(
    text: &str,
    lifecycle: Option<&BTreeSet<String>>,
) -> Result<(EventLog, ParseReport)> {
    let default_filter: BTreeSet<String> =
        DEFAULT_LIFECYCLE.iter().map(|s| s.to_string()).collect();
    let filter = lifecycle.unwrap_or(&default_filter);
    let doc = Document::parse(text).map_err(|e| Error::Xml(e.to_string()))?;
    let root = doc.root_element();
    if !root.has_tag_name("WorkflowLog") {
        return Err(Error::Xml(format!(
            "root element is <{}>, expected <WorkflowLog>",
            root.tag_name().name()
        )));
    }

    let mut report = ParseReport::default();
    let mut events = Vec::new();
    let instances = root
        .children()
        .filter(|n| n.has_tag_name("Process"))
        .flat_map(|p| p.children().filter(|n| n.has_tag_name("ProcessInstance")));
    for instance in instances {
        let line = doc.text_pos_at(instance.range().start).row;
        let case_id = instance
            .attribute("id")
            .map(str::trim)
            .filter(|s| !s.is_empty())
            .ok_or_else(|| Error::Parse {
                locator: format!("line {line}"),
                message: "ProcessInstance without id".into(),
            })?;
        for entry in instance
            .children()
            .filter(|n| n.has_tag_name("AuditTrailEntry"))
        {
            let lifecycle = child_text(entry, "EventType").unwrap_or("complete");
            if !filter.contains(lifecycle) {
                continue;
            }
            let line = doc.text_pos_at(entry.range().start).row;
            let locator = format!("line {line} (case {case_id})");
            let parsed = match (
                child_text(entry, "WorkflowModelElement"),
                child_text(entry, "Timestamp"),
            ) {
                (None, _) => Err("AuditTrailEntry without WorkflowModelElement".to_string()),
                (_, None) => Err("AuditTrailEntry without Timestamp".to_string()),
                (Some(activity), Some(ts)) => parse_timestamp(ts, "rfc3339")
                    .and_then(|t| Event::new(case_id, activity, t).map_err(|e| e.to_string())),
            };
            match parsed {
                Ok(e) => {
                    report.events_parsed += 1;
                    events.push(e);
                }
                Err(message) => report.reject(locator, message),
            }
        }
    }
    Ok((build_log(events), report))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn doc(entries: &str) -> String {
        format!(
            "<?xml version=\"1.0\"?>\n<WorkflowLog><Process id=\"p\">\
             <ProcessInstance id=\"c1\">{entries}</ProcessInstance></Process></WorkflowLog>"
        )
    }

    fn entry(activity: &str, lifecycle: &str, ts: &str) -> String {
        format!(
            "<AuditTrailEntry><WorkflowModelElement>{activity}</WorkflowModelElement>\
             <EventType>{lifecycle}</EventType><Timestamp>{ts}</Timestamp></AuditTrailEntry>"
        )
    }

    #[test]
    fn minimal_document() {
        let text = doc(&entry(
            "Weaving",
            "complete",
            "2019-01-01T01:00:00.000+01:00",
        ));
        let (log, report) = parse_mxml(&text, None).unwrap();
        assert_eq!(log.case_count(), 1);
        assert_eq!(log.event_count(), 1);
        assert_eq!(report.events_parsed, 1);
    }

    #[test]
    fn start_events_filtered_silently() {
        let text = doc(&entry("Weaving", "start", "2019-01-01T01:00:00Z"));
        let (log, report) = parse_mxml(&text, None).unwrap();
        assert_eq!(log.event_count(), 0);
        assert_eq!(report.rows_rejected, 0);

        let both: BTreeSet<String> = ["start", "complete"]
            .iter()
            .map(|s| s.to_string())
            .collect();
        let (log, _) = parse_mxml(&text, Some(&both)).unwrap();
        assert_eq!(log.event_count(), 1);
    }

    #[test]
    fn missing_timestamp_is_reported() {
        let text = doc(
            "<AuditTrailEntry><WorkflowModelElement>A</WorkflowModelElement>\
             <EventType>complete</EventType></AuditTrailEntry>",
        );
        let (log, report) = parse_mxml(&text, None).unwrap();
        assert!(log.is_empty());
        assert_eq!(report.rows_rejected, 1);
        assert!(report.first_errors[0].1.contains("Timestamp"));
    }

    #[test]
    fn missing_instance_id_and_malformed_xml() {
        let text =
            "<WorkflowLog><Process><ProcessInstance></ProcessInstance></Process></WorkflowLog>";
        assert!(matches!(parse_mxml(text, None), Err(Error::Parse { .. })));
        assert!(matches!(
            parse_mxml("<WorkflowLog><Process>", None),
            Err(Error::Xml(_))
        ));
        assert!(matches!(parse_mxml("<Log/>", None), Err(Error::Xml(_))));
    }
}
