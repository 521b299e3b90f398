//! View models behind the annotation screens, plus the HTML they render
//! to. Each one reads a public API projection and produces the exact
//! request the browser would send, so the screens can be exercised without
//! a browser.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde_json::{json, Value};

use hyperdesc_core::metrics::{lint_description, LintFinding};
use hyperdesc_core::workflow::{DigestObject, Task1State, Task2View};
use hyperdesc_core::{BoundingBox, Error, FiveMetricRating, Metric, ObjectAnnotation, PresentedItem, Result};

/// A request the screen wants to send.
#[derive(Debug, Clone, PartialEq)]
pub struct Mutation {
    pub method: &'static str,
    pub path: String,
    pub body: Value,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Banner {
    /// The state moved on under the user; reload before editing again.
    ReloadAndRetry,
    TldrReminder,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum UiTask {
    Task1,
    Task2,
    Sxs,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Assignment {
    pub project_id: String,
    /// Image id for the two annotation tasks, item id for SxS.
    pub target: String,
    pub task: UiTask,
    pub version: u64,
}

/// One browser tab. At most one mutation is in flight: a new one is
/// refused until the last response has been applied.
#[derive(Debug, Clone, PartialEq)]
pub struct UiSession {
    pub annotator_id: String,
    pub api_token: Option<String>,
    pub assignment: Option<Assignment>,
    in_flight: Option<Mutation>,
    pub banner: Option<Banner>,
}

impl UiSession {
    pub fn new(annotator_id: &str, api_token: Option<&str>) -> Self {
        Self {
            annotator_id: annotator_id.to_string(),
            api_token: api_token.map(str::to_string),
            assignment: None,
            in_flight: None,
            banner: None,
        }
    }

    pub fn assign(&mut self, assignment: Assignment) {
        self.assignment = Some(assignment);
        self.banner = None;
    }

    pub fn headers(&self) -> Vec<(String, String)> {
        let mut h = vec![("content-type".to_string(), "application/json".to_string())];
        if let Some(t) = &self.api_token {
            h.push(("authorization".to_string(), format!("Bearer {t}")));
        }
        h
    }

    pub fn in_flight(&self) -> Option<&Mutation> {
        self.in_flight.as_ref()
    }

    /// Marks `m` as sent.
    pub fn send(&mut self, m: Mutation) -> Result<&Mutation> {
        if self.in_flight.is_some() {
            return Err(Error::StateViolation("a request is already in flight".into()));
        }
        if self.banner == Some(Banner::ReloadAndRetry) {
            return Err(Error::StateViolation("reload before editing".into()));
        }
        Ok(self.in_flight.insert(m))
    }

    /// Applies the response to the in-flight request. Local state only
    /// advances on success; a conflict raises the reload banner.
    pub fn receive(&mut self, status: u16, body: &Value) -> Result<()> {
        if self.in_flight.take().is_none() {
            return Err(Error::StateViolation("no request in flight".into()));
        }
        match status {
            200..=299 => {
                if let (Some(a), Some(v)) = (self.assignment.as_mut(), body.get("version").and_then(Value::as_u64)) {
                    a.version = v;
                }
                Ok(())
            }
            409 => {
                self.banner = Some(Banner::ReloadAndRetry);
                Ok(())
            }
            _ => Err(Error::InvalidArgument(format!("request failed with status {status}"))),
        }
    }
}

/// Pixel size of the displayed image.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Canvas {
    pub width: f64,
    pub height: f64,
}

impl Canvas {
    /// Box spanned by two pixel corners in any order, normalized and
    /// clamped to the image.
    pub fn normalize(&self, a: (f64, f64), b: (f64, f64)) -> BoundingBox {
        let nx = |x: f64| (x / self.width).clamp(0.0, 1.0);
        let ny = |y: f64| (y / self.height).clamp(0.0, 1.0);
        BoundingBox::new(ny(a.1.min(b.1)), nx(a.0.min(b.0)), ny(a.1.max(b.1)), nx(a.0.max(b.0)))
    }
}

pub struct Task1Editor {
    pub project_id: String,
    pub image_id: String,
    pub annotator: String,
    pub version: u64,
    pub objects: Vec<ObjectAnnotation>,
    pub selected: BTreeSet<String>,
    pub canvas: Canvas,
}

impl Task1Editor {
    pub fn new(project_id: &str, annotator: &str, state: &Task1State, canvas: Canvas) -> Self {
        Self {
            project_id: project_id.to_string(),
            image_id: state.image_id.clone(),
            annotator: annotator.to_string(),
            version: state.version,
            objects: state.active_objects().cloned().collect(),
            selected: BTreeSet::new(),
            canvas,
        }
    }

    fn edit(&self, edit: Value) -> Mutation {
        Mutation {
            method: "POST",
            path: format!("/projects/{}/task1/{}/edits", self.project_id, self.image_id),
            body: json!({"expected_version": self.version, "annotator": self.annotator, "edit": edit}),
        }
    }

    pub fn draw(&self, from: (f64, f64), to: (f64, f64), label: &str, description: &str) -> Mutation {
        let b = self.canvas.normalize(from, to);
        self.edit(json!({"kind": "add", "label": label, "box": b, "description": description}))
    }

    pub fn resize(&self, target: &str, from: (f64, f64), to: (f64, f64)) -> Result<Mutation> {
        self.object(target)?;
        let b = self.canvas.normalize(from, to);
        Ok(self.edit(json!({"kind": "edit", "target": target, "box": b})))
    }

    pub fn relabel(&self, target: &str, label: Option<&str>, description: Option<&str>) -> Result<Mutation> {
        self.object(target)?;
        let mut e = json!({"kind": "edit", "target": target});
        if let Some(l) = label {
            e["label"] = json!(l);
        }
        if let Some(d) = description {
            e["description"] = json!(d);
        }
        Ok(self.edit(e))
    }

    pub fn remove(&self, target: &str) -> Result<Mutation> {
        self.object(target)?;
        Ok(self.edit(json!({"kind": "remove", "target": target})))
    }

    pub fn toggle_select(&mut self, id: &str) -> Result<()> {
        self.object(id)?;
        if !self.selected.remove(id) {
            self.selected.insert(id.to_string());
        }
        Ok(())
    }

    /// Union of the selected boxes, shown as an editable starting box.
    pub fn merge_prefill(&self) -> Result<BoundingBox> {
        if self.selected.len() < 2 {
            return Err(Error::InvalidArgument("select at least two objects to merge".into()));
        }
        let mut boxes = self.selected.iter().map(|id| self.object(id).map(|o| o.bbox));
        let first = boxes.next().expect("two selected")?;
        boxes.try_fold(first, |acc, b| Ok(acc.union(b?)))
    }

    /// Merge of the selection; `bbox` is the (possibly adjusted) prefill.
    pub fn merge(&self, label: &str, description: &str, bbox: BoundingBox) -> Result<Mutation> {
        self.merge_prefill()?;
        let members: Vec<&String> = self.selected.iter().collect();
        Ok(self.edit(json!({"kind": "merge", "members": members, "label": label, "box": bbox, "description": description})))
    }

    fn object(&self, id: &str) -> Result<&ObjectAnnotation> {
        self.objects
            .iter()
            .find(|o| o.object_id == id)
            .ok_or_else(|| Error::NotFound(format!("object {id:?}")))
    }

    pub fn render(&self) -> String {
        let mut panel = String::new();
        for o in &self.objects {
            let sel = if self.selected.contains(&o.object_id) { " selected" } else { "" };
            let _ = write!(
                panel,
                "<li class=\"object{sel}\" data-object=\"{id}\" data-box=\"{b}\"><input name=\"label\" value=\"{l}\"><textarea name=\"description\">{d}</textarea></li>",
                id = escape(&o.object_id),
                b = o.bbox.to_text(),
                l = escape(&o.label),
                d = escape(&o.description),
            );
        }
        page(
            "Task 1",
            &format!(
                "<section id=\"task1\" data-version=\"{}\"><div class=\"canvas\" data-width=\"{}\" data-height=\"{}\"></div><ul class=\"objects\">{panel}</ul><button id=\"merge\"{}>Merge</button></section>",
                self.version,
                self.canvas.width,
                self.canvas.height,
                if self.selected.len() < 2 { " disabled" } else { "" },
            ),
        )
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Tooltip {
    pub label: String,
    pub bbox: BoundingBox,
    pub description: String,
}

pub struct Task2Editor {
    pub project_id: String,
    pub annotator: String,
    pub view: Task2View,
    pub text: String,
    pub overlays_visible: bool,
    pub hovered: Option<String>,
    /// Seconds on the caller's clock of the first keystroke.
    first_keystroke: Option<f64>,
}

impl Task2Editor {
    pub fn new(project_id: &str, annotator: &str, view: Task2View) -> Self {
        Self {
            project_id: project_id.to_string(),
            annotator: annotator.to_string(),
            view,
            text: String::new(),
            overlays_visible: true,
            hovered: None,
            first_keystroke: None,
        }
    }

    pub fn banners(&self) -> Vec<Banner> {
        vec![Banner::TldrReminder]
    }

    /// Replaces the draft; returns the lint findings to underline.
    pub fn input(&mut self, text: &str, now: f64) -> Vec<LintFinding> {
        self.first_keystroke.get_or_insert(now);
        self.text = text.to_string();
        self.findings()
    }

    pub fn findings(&self) -> Vec<LintFinding> {
        lint_description(&self.text)
    }

    pub fn toggle_overlays(&mut self) {
        self.overlays_visible = !self.overlays_visible;
        if !self.overlays_visible {
            self.hovered = None;
        }
    }

    /// Hovering an object shows its box and Task-1 description.
    pub fn hover(&mut self, object_id: &str) -> Option<Tooltip> {
        if !self.overlays_visible {
            return None;
        }
        let o: &DigestObject = self.view.objects.iter().find(|o| o.object_id == object_id)?;
        self.hovered = Some(o.object_id.clone());
        Some(Tooltip { label: o.label.clone(), bbox: o.bbox, description: o.description.clone() })
    }

    pub fn can_submit(&self) -> bool {
        !self.text.trim().is_empty()
    }

    pub fn submit(&self, now: f64) -> Result<Mutation> {
        if !self.can_submit() {
            return Err(Error::InvalidArgument("description is empty".into()));
        }
        let elapsed = self.first_keystroke.map_or(0.0, |t| (now - t).max(0.0));
        Ok(Mutation {
            method: "POST",
            path: format!("/projects/{}/task2/{}/rounds", self.project_id, self.view.image_id),
            body: json!({
                "expected_version": self.view.version,
                "annotator": self.annotator,
                "text": self.text,
                "elapsed_seconds": elapsed,
            }),
        })
    }

    pub fn render(&self) -> String {
        let mut body = format!(
            "<section id=\"task2\" data-version=\"{}\" data-round=\"{}\"><p class=\"banner tldr\">Open with a one-sentence summary (TLDR).</p>",
            self.view.version, self.view.round_index
        );
        for t in &self.view.texts {
            let _ = write!(body, "<article class=\"prior\"><h3>{}</h3><p>{}</p></article>", escape(&t.label), escape(&t.text));
        }
        let hidden = if self.overlays_visible { "" } else { " hidden" };
        let _ = write!(body, "<button id=\"toggle-overlays\">Hide objects</button><div class=\"overlays\"{hidden}>");
        for o in &self.view.objects {
            let _ = write!(
                body,
                "<div class=\"overlay\" data-object=\"{}\" data-box=\"{}\" title=\"{}\">{}</div>",
                escape(&o.object_id),
                o.bbox.to_text(),
                escape(&o.description),
                escape(&o.label)
            );
        }
        body.push_str("</div><div class=\"editor\">");
        body.push_str(&highlight(&self.text, &self.findings()));
        let _ = write!(body, "</div><button id=\"submit\"{}>Submit</button></section>", disabled(!self.can_submit()));
        page("Task 2", &body)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Key {
    Up,
    Down,
    /// `1` to `5`, mapped to -2 (A much better) through +2 (B much better).
    Digit(u8),
    Enter,
}

pub struct SxsRater {
    pub project_id: String,
    pub item: PresentedItem,
    pub values: [Option<i8>; 5],
    pub focus: usize,
    pub justification: String,
}

impl SxsRater {
    pub fn new(project_id: &str, item: PresentedItem) -> Self {
        Self { project_id: project_id.to_string(), item, values: [None; 5], focus: 0, justification: String::new() }
    }

    pub fn set(&mut self, metric: Metric, value: i8) -> Result<()> {
        if !(-2..=2).contains(&value) {
            return Err(Error::InvalidArgument(format!("rating {value} outside -2..=2")));
        }
        let i = Metric::ALL.iter().position(|&m| m == metric).expect("listed");
        self.values[i] = Some(value);
        Ok(())
    }

    /// Keyboard control; `Enter` returns the submission when allowed.
    pub fn key(&mut self, key: Key) -> Option<Mutation> {
        match key {
            Key::Up => self.focus = self.focus.saturating_sub(1),
            Key::Down => self.focus = (self.focus + 1).min(4),
            Key::Digit(d @ 1..=5) => {
                self.values[self.focus] = Some(d as i8 - 3);
                self.focus = (self.focus + 1).min(4);
            }
            Key::Digit(_) => {}
            Key::Enter => return self.submit().ok(),
        }
        None
    }

    pub fn can_submit(&self) -> bool {
        self.values.iter().all(Option::is_some) && !self.justification.trim().is_empty()
    }

    /// The rating travels in the A/B frame the rater saw.
    pub fn submit(&self) -> Result<Mutation> {
        if !self.can_submit() {
            return Err(Error::InvalidArgument("rate all five metrics and justify".into()));
        }
        let v = self.values.map(|v| v.expect("checked"));
        let rating = FiveMetricRating::new(v[0], v[1], v[2], v[3], v[4]);
        Ok(Mutation {
            method: "POST",
            path: format!("/projects/{}/sxs/items/{}/judgment", self.project_id, self.item.item_id),
            body: json!({"expected_version": self.item.version, "rating": rating, "justification": self.justification}),
        })
    }

    pub fn render(&self) -> String {
        let mut body = format!(
            "<section id=\"sxs\" data-version=\"{}\"><article class=\"side\"><h3>A</h3><p>{}</p></article><article class=\"side\"><h3>B</h3><p>{}</p></article>",
            self.item.version,
            escape(&self.item.text_a),
            escape(&self.item.text_b)
        );
        for (i, m) in Metric::ALL.iter().enumerate() {
            let focus = if i == self.focus { " autofocus" } else { "" };
            let _ = write!(body, "<fieldset class=\"metric\" data-metric=\"{}\"{focus}><legend>{}</legend>", m.name(), m.display_name());
            for v in -2i8..=2 {
                let checked = if self.values[i] == Some(v) { " checked" } else { "" };
                let _ = write!(body, "<input type=\"radio\" name=\"{}\" value=\"{v}\" accesskey=\"{}\"{checked}>", m.name(), v + 3);
            }
            body.push_str("</fieldset>");
        }
        let _ = write!(
            body,
            "<textarea name=\"justification\" required>{}</textarea><button id=\"submit\"{}>Submit</button></section>",
            escape(&self.justification),
            disabled(!self.can_submit())
        );
        page("Side by side", &body)
    }
}

fn disabled(yes: bool) -> &'static str {
    if yes {
        " disabled"
    } else {
        ""
    }
}

fn page(title: &str, body: &str) -> String {
    format!("<!doctype html><html><head><meta charset=\"utf-8\"><title>{title}</title></head><body>{body}</body></html>\n")
}

pub fn escape(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

/// Draft text with each lint finding wrapped in `<mark>`. Offsets are byte
/// offsets into `text`.
fn highlight(text: &str, findings: &[LintFinding]) -> String {
    let mut out = String::new();
    let mut at = 0;
    let mut sorted: Vec<&LintFinding> = findings.iter().collect();
    sorted.sort_by_key(|f| f.offset);
    for f in sorted {
        if f.offset < at || !text.is_char_boundary(f.offset) || !text.is_char_boundary(f.offset + f.len) {
            continue;
        }
        out.push_str(&escape(&text[at..f.offset]));
        let _ = write!(out, "<mark class=\"lint\" title=\"{}\">{}</mark>", escape(&f.phrase), escape(&text[f.offset..f.offset + f.len]));
        at = f.offset + f.len;
    }
    out.push_str(&escape(&text[at..]));
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn escapes_markup() {
        assert_eq!(escape("<b a=\"1\">&'"), "&lt;b a=&quot;1&quot;&gt;&amp;&#39;");
    }

    #[test]
    fn corners_in_any_order() {
        let c = Canvas { width: 200.0, height: 100.0 };
        assert_eq!(c.normalize((150.0, 80.0), (50.0, 20.0)), BoundingBox::new(0.2, 0.25, 0.8, 0.75));
        assert_eq!(c.normalize((-10.0, -5.0), (250.0, 130.0)), BoundingBox::new(0.0, 0.0, 1.0, 1.0));
    }

    #[test]
    fn highlight_marks_findings() {
        let text = "In this image a <cat>.";
        let f = lint_description(text);
        assert_eq!(f.len(), 1);
        let html = highlight(text, &f);
        assert!(html.starts_with("<mark class=\"lint\""));
        assert!(html.ends_with("a &lt;cat&gt;."));
    }
}
