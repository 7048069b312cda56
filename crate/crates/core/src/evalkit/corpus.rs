use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::GroundTruthLabel;
use crate::runtime::{CollectorSpec, SnapshotEvent};
use crate::snapshot::{NodeId, Rect, UiNode, UiSnapshot};

/// `{package}` is replaced by the corpus package.
pub const ADVERTISER_QUERY: &str = r#"(conj (hasPackageName "{package}") (hasClassName "android.widget.TextView") (above (conj (hasText "Sponsored") (hasClassName "android.widget.Button"))))"#;

const WIDTH: i32 = 1080;
const HEIGHT: i32 = 1920;
const COLUMNS: i32 = 3;
const FOREIGN_PACKAGE: &str = "com.android.chrome";

const ADJECTIVES: &[&str] = &[
    "Lunar", "Bright", "Golden", "Urban", "Silent", "Rapid", "Noble", "Crisp", "Wild", "Blue", "Clever", "Velvet",
    "Solar", "Happy", "Honest", "Little", "Royal", "Fresh", "Bold", "Quiet", "Cosmic", "Sunny", "Misty", "Amber",
];
const NOUNS: &[&str] = &[
    "Coffee", "Sneakers", "Bank", "Garden", "Motors", "Bakery", "Studio", "Airlines", "Books", "Kitchen", "Fitness",
    "Outfitters", "Pets", "Travel", "Games", "Market", "Optics", "Audio", "Denim", "Tea", "Bikes", "Labs", "Homes",
    "Candles",
];
const FILLER: &[&str] = &["Like", "Share", "Reply", "Follow", "See more", "Send message", "Shop now", "Close"];

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct CorpusParams {
    pub package_name: String,
    pub events: usize,
    pub min_targets: usize,
    pub max_targets: usize,
    pub min_distractors: usize,
    pub max_distractors: usize,
    pub start_time: i64,
    pub interval_ms: i64,
    /// Chance that a target repeats a value from the previous screen.
    pub repeat_rate: f64,
    /// Fraction of events with another app in the foreground (never labeled).
    pub foreign_rate: f64,
}

impl Default for CorpusParams {
    fn default() -> Self {
        CorpusParams {
            package_name: "com.instagram.android".into(),
            events: 10,
            min_targets: 1,
            max_targets: 1,
            min_distractors: 2,
            max_distractors: 12,
            start_time: 0,
            interval_ms: 1_000,
            repeat_rate: 0.0,
            foreign_rate: 0.0,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Corpus {
    pub events: Vec<SnapshotEvent>,
    pub labels: Vec<GroundTruthLabel>,
    /// A collector for the advertiser pattern spanning the whole corpus.
    pub spec: CollectorSpec,
}

struct Builder {
    package: String,
    nodes: Vec<UiNode>,
}

impl Builder {
    fn add(&mut self, parent: NodeId, class: &str, bounds: Rect) -> NodeId {
        let id = NodeId(self.nodes.len() as u32);
        let mut n = UiNode::new(id, &self.package, class, bounds);
        n.parent = Some(parent);
        self.nodes[parent.0 as usize].children.push(id);
        self.nodes.push(n);
        id
    }

    fn add_text(&mut self, parent: NodeId, class: &str, text: &str, bounds: Rect) -> NodeId {
        let id = self.add(parent, class, bounds);
        self.nodes[id.0 as usize].text = Some(text.to_string());
        id
    }
}

/// Generates a feed-like event stream in which each screen shows zero or more
/// advertiser names directly above a "Sponsored" button. Deterministic per seed.
pub fn generate_corpus(seed: u64, params: &CorpusParams) -> Corpus {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut used_names = std::collections::BTreeSet::new();
    let mut previous: Vec<String> = Vec::new();
    let mut events = Vec::with_capacity(params.events);
    let mut labels = Vec::new();
    let max_targets = params.max_targets.min(COLUMNS as usize);
    let min_targets = params.min_targets.min(max_targets);

    for i in 0..params.events {
        let timestamp = params.start_time + i as i64 * params.interval_ms;
        let foreign = rng.gen_bool(params.foreign_rate.clamp(0.0, 1.0));
        let package = if foreign { FOREIGN_PACKAGE } else { params.package_name.as_str() };
        let mut b = Builder { package: package.to_string(), nodes: Vec::new() };
        b.nodes.push(UiNode::new(NodeId(0), package, "android.widget.FrameLayout", Rect::new(0, 0, WIDTH, HEIGHT)));
        let col_w = WIDTH / COLUMNS;
        let columns: Vec<NodeId> = (0..COLUMNS)
            .map(|c| b.add(NodeId(0), "android.widget.LinearLayout", Rect::new(c * col_w, 0, (c + 1) * col_w, HEIGHT)))
            .collect();

        let k = rng.gen_range(min_targets..=max_targets);
        let mut order: Vec<usize> = (0..COLUMNS as usize).collect();
        order.shuffle(&mut rng);
        let (target_cols, free_cols) = order.split_at(k);
        // Lowest free y per column, for distractors below the anchor.
        let mut floor = vec![0; COLUMNS as usize];
        let mut shown = Vec::new();
        for &c in target_cols {
            let x = c as i32 * col_w;
            let y = rng.gen_range(100..1500);
            let name = pick_name(&mut rng, &mut used_names, &previous, params.repeat_rate);
            b.add_text(columns[c], "android.widget.TextView", &name, Rect::new(x + 20, y, x + 340, y + 50));
            let btn = b.add_text(columns[c], "android.widget.Button", "Sponsored", Rect::new(x + 20, y + 60, x + 200, y + 100));
            b.nodes[btn.0 as usize].clickable = true;
            floor[c] = y + 110;
            if !foreign {
                labels.push(GroundTruthLabel { timestamp, expected_value: name.clone(), app_package: package.to_string() });
            }
            shown.push(name);
        }

        let d = rng.gen_range(params.min_distractors..=params.max_distractors.max(params.min_distractors));
        for _ in 0..d {
            let c = rng.gen_range(0..COLUMNS as usize);
            if floor[c] > HEIGHT - 80 {
                continue;
            }
            let x = c as i32 * col_w;
            let y = rng.gen_range(floor[c]..=HEIGHT - 80);
            let bounds = Rect::new(x + 20, y, x + rng.gen_range(120..340), y + rng.gen_range(30..70));
            let parent = columns[c];
            match rng.gen_range(0..4) {
                0 => {
                    let id = b.add_text(parent, "android.widget.Button", FILLER.choose(&mut rng).unwrap(), bounds);
                    b.nodes[id.0 as usize].clickable = true;
                }
                1 => {
                    let id = b.add(parent, "android.widget.ImageView", bounds);
                    b.nodes[id.0 as usize].content_description = Some("Profile picture".into());
                }
                2 if free_cols.contains(&c) => {
                    // A plain-text "Sponsored" label, not the anchor button.
                    b.add_text(parent, "android.widget.TextView", "Sponsored", bounds);
                }
                _ => {
                    let word = format!("{} {}", ADJECTIVES.choose(&mut rng).unwrap(), FILLER.choose(&mut rng).unwrap());
                    b.add_text(parent, "android.widget.TextView", &word, bounds);
                }
            }
            if !free_cols.contains(&c) {
                floor[c] = bounds.bottom + 10;
            }
        }

        previous = shown;
        let snapshot = UiSnapshot::from_nodes(format!("corpus-{seed}-{i}"), timestamp, WIDTH as u32, HEIGHT as u32, b.nodes)
            .expect("generated tree is valid");
        events.push(SnapshotEvent { timestamp, foreground_package: package.to_string(), snapshot });
    }

    let end_time = params.start_time + params.events.max(1) as i64 * params.interval_ms.max(1);
    let spec = CollectorSpec {
        collector_id: format!("corpus-{seed}"),
        package_name: params.package_name.clone(),
        start_time: params.start_time,
        end_time,
        queries: vec![ADVERTISER_QUERY.replace("{package}", &params.package_name)],
        description: "advertiser names above a Sponsored button".into(),
    };
    Corpus { events, labels, spec }
}

fn pick_name(
    rng: &mut ChaCha8Rng,
    used: &mut std::collections::BTreeSet<String>,
    previous: &[String],
    repeat_rate: f64,
) -> String {
    if !previous.is_empty() && rng.gen_bool(repeat_rate.clamp(0.0, 1.0)) {
        return previous.choose(rng).unwrap().clone();
    }
    for _ in 0..16 {
        let name = format!("{} {}", ADJECTIVES.choose(rng).unwrap(), NOUNS.choose(rng).unwrap());
        if used.insert(name.clone()) {
            return name;
        }
    }
    let name = format!("{} {} {}", ADJECTIVES.choose(rng).unwrap(), NOUNS.choose(rng).unwrap(), used.len());
    used.insert(name.clone());
    name
}
