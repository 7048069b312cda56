//! Semantic content extraction from element text.
//!
//! The pattern set is fixed; `docs/semantic-patterns.md` lists each pattern
//! and its object encoding.

use std::collections::BTreeSet;
use std::sync::LazyLock;

use regex::Regex;
use serde::{Deserialize, Serialize};

use super::{ObjectValue, Predicate};

/// Enables or disables each semantic predicate.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "camelCase", default)]
pub struct SemanticToggles {
    pub money: bool,
    pub date: bool,
    pub time: bool,
    pub phone_number: bool,
    pub email_address: bool,
    pub number: bool,
    pub percentage: bool,
    pub temperature: bool,
}

impl Default for SemanticToggles {
    fn default() -> Self {
        SemanticToggles {
            money: true,
            date: true,
            time: true,
            phone_number: true,
            email_address: true,
            number: true,
            percentage: true,
            temperature: true,
        }
    }
}

impl SemanticToggles {
    fn enabled(&self, p: Predicate) -> bool {
        match p {
            Predicate::ContainsMoney => self.money,
            Predicate::ContainsDate => self.date,
            Predicate::ContainsTime => self.time,
            Predicate::ContainsPhoneNumber => self.phone_number,
            Predicate::ContainsEmailAddress => self.email_address,
            Predicate::ContainsNumber => self.number,
            Predicate::ContainsPercentage => self.percentage,
            Predicate::ContainsTemperature => self.temperature,
            _ => false,
        }
    }
}

const NUM: &str = r"\d{1,3}(?:,\d{3})+(?:\.\d+)?|\d+(?:\.\d+)?";

static NUMBER_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(NUM).unwrap());
static MONEY_PREFIX_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"[$€£¥₹]\s?({NUM})")).unwrap());
static MONEY_SUFFIX_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"({NUM})\s?(?:USD|EUR|GBP|JPY|INR|CAD|AUD|CNY)\b")).unwrap());
static PERCENT_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(&format!(r"({NUM})\s?%")).unwrap());
static TEMPERATURE_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(&format!(r"(-?(?:{NUM}))\s?°\s?[CF]\b")).unwrap());
static TIME_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"\b([01]?\d|2[0-3]):([0-5]\d)(?::[0-5]\d)?(?:\s*([AaPp])\.?[Mm]\.?)?").unwrap()
});
static TIME_HOUR_ONLY_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(1[0-2]|0?[1-9])\s*([AaPp])\.?[Mm]\b\.?").unwrap());
static ISO_DATE_RE: LazyLock<Regex> = LazyLock::new(|| Regex::new(r"\b(\d{4})-(\d{2})-(\d{2})\b").unwrap());
static SLASH_DATE_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b(\d{1,2})/(\d{1,2})/(\d{4}|\d{2})\b").unwrap());
const MONTHS: &str = r"(Jan(?:uary)?|Feb(?:ruary)?|Mar(?:ch)?|Apr(?:il)?|May|June?|July?|Aug(?:ust)?|Sep(?:t(?:ember)?)?|Oct(?:ober)?|Nov(?:ember)?|Dec(?:ember)?)";
static MONTH_FIRST_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"(?i)\b{MONTHS}\.?\s+(\d{{1,2}})(?:st|nd|rd|th)?\b(?:,?\s+(\d{{4}})\b)?")).unwrap()
});
static DAY_FIRST_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(&format!(r"(?i)\b(\d{{1,2}})(?:st|nd|rd|th)?\s+{MONTHS}\b\.?(?:,?\s+(\d{{4}})\b)?")).unwrap()
});
static PHONE_RE: LazyLock<Regex> = LazyLock::new(|| {
    Regex::new(r"(\+\d{1,3}[\s.-]?)?(\(\d{2,4}\)[\s.-]?)?\d{2,4}(?:[\s.-]\d{2,4}){1,4}").unwrap()
});
static EMAIL_RE: LazyLock<Regex> =
    LazyLock::new(|| Regex::new(r"\b[A-Za-z0-9._%+-]+@[A-Za-z0-9-]+(?:\.[A-Za-z0-9-]+)*\.[A-Za-z]{2,}\b").unwrap());

fn number_value(text: &str) -> Option<f64> {
    text.replace(',', "").parse::<f64>().ok()
}

fn num(v: f64) -> ObjectValue {
    ObjectValue::number(v)
}

fn month_index(name: &str) -> u32 {
    let lower = name.to_ascii_lowercase();
    ["jan", "feb", "mar", "apr", "may", "jun", "jul", "aug", "sep", "oct", "nov", "dec"]
        .iter()
        .position(|m| lower.starts_with(m))
        .map(|i| i as u32 + 1)
        .unwrap_or(0)
}

fn date_string(year: Option<u32>, month: u32, day: u32) -> Option<String> {
    if !(1..=12).contains(&month) || !(1..=31).contains(&day) {
        return None;
    }
    Some(match year {
        Some(y) => format!("{y:04}-{month:02}-{day:02}"),
        None => format!("{month:02}-{day:02}"),
    })
}

/// Extracts every semantic fact the fixed pattern set finds in `text`.
pub fn parse_semantic(text: &str) -> BTreeSet<(Predicate, ObjectValue)> {
    parse_semantic_with(text, &SemanticToggles::default())
}

pub fn parse_semantic_with(text: &str, toggles: &SemanticToggles) -> BTreeSet<(Predicate, ObjectValue)> {
    let mut out = BTreeSet::new();
    if text.is_empty() {
        return out;
    }

    for caps in MONEY_PREFIX_RE.captures_iter(text).chain(MONEY_SUFFIX_RE.captures_iter(text)) {
        if let Some(v) = number_value(&caps[1]) {
            out.insert((Predicate::ContainsMoney, num(v)));
        }
    }
    for caps in PERCENT_RE.captures_iter(text) {
        if let Some(v) = number_value(&caps[1]) {
            out.insert((Predicate::ContainsPercentage, num(v)));
        }
    }
    for caps in TEMPERATURE_RE.captures_iter(text) {
        if let Some(v) = number_value(&caps[1]) {
            out.insert((Predicate::ContainsTemperature, num(v)));
        }
    }

    for caps in TIME_RE.captures_iter(text) {
        let mut hour: u32 = caps[1].parse().unwrap();
        let minute: u32 = caps[2].parse().unwrap();
        if let Some(meridiem) = caps.get(3) {
            if !(1..=12).contains(&hour) {
                continue;
            }
            hour = to_24h(hour, meridiem.as_str());
        }
        out.insert((Predicate::ContainsTime, ObjectValue::String(format!("{hour:02}:{minute:02}"))));
    }
    for caps in TIME_HOUR_ONLY_RE.captures_iter(text) {
        let start = caps.get(0).unwrap().start();
        if text[..start].ends_with(':') {
            continue;
        }
        let hour = to_24h(caps[1].parse().unwrap(), &caps[2]);
        out.insert((Predicate::ContainsTime, ObjectValue::String(format!("{hour:02}:00"))));
    }

    let mut date_spans = Vec::new();
    for caps in ISO_DATE_RE.captures_iter(text) {
        let (y, m, d) = (caps[1].parse().ok(), caps[2].parse().unwrap(), caps[3].parse().unwrap());
        if let Some(s) = date_string(y, m, d) {
            date_spans.push(caps.get(0).unwrap().range());
            out.insert((Predicate::ContainsDate, ObjectValue::String(s)));
        }
    }
    for caps in SLASH_DATE_RE.captures_iter(text) {
        let mut year: u32 = caps[3].parse().unwrap();
        if caps[3].len() == 2 {
            year += 2000;
        }
        if let Some(s) = date_string(Some(year), caps[1].parse().unwrap(), caps[2].parse().unwrap()) {
            date_spans.push(caps.get(0).unwrap().range());
            out.insert((Predicate::ContainsDate, ObjectValue::String(s)));
        }
    }
    for caps in MONTH_FIRST_RE.captures_iter(text) {
        let year = caps.get(3).and_then(|y| y.as_str().parse().ok());
        if let Some(s) = date_string(year, month_index(&caps[1]), caps[2].parse().unwrap()) {
            out.insert((Predicate::ContainsDate, ObjectValue::String(s)));
        }
    }
    for caps in DAY_FIRST_RE.captures_iter(text) {
        let year = caps.get(3).and_then(|y| y.as_str().parse().ok());
        if let Some(s) = date_string(year, month_index(&caps[2]), caps[1].parse().unwrap()) {
            out.insert((Predicate::ContainsDate, ObjectValue::String(s)));
        }
    }

    for m in PHONE_RE.find_iter(text) {
        let span = m.range();
        if date_spans.iter().any(|d| d.start < span.end && span.start < d.end) {
            continue;
        }
        if !standalone(text, span.start, span.end) {
            continue;
        }
        let digits: String = m.as_str().chars().filter(char::is_ascii_digit).collect();
        if (7..=15).contains(&digits.len()) {
            let value = if m.as_str().starts_with('+') { format!("+{digits}") } else { digits };
            out.insert((Predicate::ContainsPhoneNumber, ObjectValue::String(value)));
        }
    }

    for m in EMAIL_RE.find_iter(text) {
        out.insert((Predicate::ContainsEmailAddress, ObjectValue::String(m.as_str().to_ascii_lowercase())));
    }

    for m in NUMBER_RE.find_iter(text) {
        if !standalone(text, m.start(), m.end()) {
            continue;
        }
        let Some(mut v) = number_value(m.as_str()) else { continue };
        let before = text[..m.start()].chars().next_back();
        if before == Some('-') {
            let prior = text[..m.start() - 1].chars().next_back();
            if prior.is_none_or(char::is_whitespace) {
                v = -v;
            }
        }
        out.insert((Predicate::ContainsNumber, num(v)));
    }

    out.retain(|(p, _)| toggles.enabled(*p));
    out
}

fn to_24h(hour: u32, meridiem: &str) -> u32 {
    let pm = meridiem.eq_ignore_ascii_case("p");
    match (hour, pm) {
        (12, false) => 0,
        (12, true) => 12,
        (h, true) => h + 12,
        (h, false) => h,
    }
}

/// True when the span is not glued to letters or digits on either side.
fn standalone(text: &str, start: usize, end: usize) -> bool {
    let before = text[..start].chars().next_back();
    let after = text[end..].chars().next();
    let glued = |c: Option<char>| c.is_some_and(|c| c.is_alphanumeric() || c == '_');
    !glued(before) && !glued(after) && before != Some('.')
}

#[cfg(test)]
mod tests {
    use super::*;
    use Predicate::*;

    fn s(v: &str) -> ObjectValue {
        ObjectValue::String(v.into())
    }

    #[test]
    fn dollar_amount() {
        let got = parse_semantic("$12.50");
        let want: BTreeSet<_> = [(ContainsMoney, num(12.5)), (ContainsNumber, num(12.5))].into();
        assert_eq!(got, want);
    }

    #[test]
    fn empty_text() {
        assert!(parse_semantic("").is_empty());
        assert!(parse_semantic("Sponsored").is_empty());
    }

    #[test]
    fn mixed_sentence() {
        let got = parse_semantic("Meet at 3:45 PM on 2025-02-08, 20% off");
        assert!(got.contains(&(ContainsTime, s("15:45"))), "{got:?}");
        assert!(got.contains(&(ContainsDate, s("2025-02-08"))));
        assert!(got.contains(&(ContainsPercentage, num(20.0))));
        assert!(got.contains(&(ContainsNumber, num(20.0))));
        assert!(!got.iter().any(|(p, _)| *p == ContainsPhoneNumber), "{got:?}");
        assert!(!got.iter().any(|(p, _)| *p == ContainsMoney));
    }

    #[test]
    fn currency_suffix_and_grouping() {
        let got = parse_semantic("Total 1,299.99 USD");
        assert!(got.contains(&(ContainsMoney, num(1299.99))));
        assert!(got.contains(&(ContainsNumber, num(1299.99))));
    }

    #[test]
    fn month_names() {
        assert!(parse_semantic("Feb 8, 2025").contains(&(ContainsDate, s("2025-02-08"))));
        assert!(parse_semantic("8 February").contains(&(ContainsDate, s("02-08"))));
        assert!(parse_semantic("posted on 3/14/24").contains(&(ContainsDate, s("2024-03-14"))));
    }

    #[test]
    fn times() {
        assert!(parse_semantic("12:05 AM").contains(&(ContainsTime, s("00:05"))));
        assert!(parse_semantic("closes 9pm").contains(&(ContainsTime, s("21:00"))));
        assert!(parse_semantic("at 18:30").contains(&(ContainsTime, s("18:30"))));
    }

    #[test]
    fn phone_and_email() {
        let got = parse_semantic("Call +1 415-555-0100 or mail Help@Example.com");
        assert!(got.contains(&(ContainsPhoneNumber, s("+14155550100"))), "{got:?}");
        assert!(got.contains(&(ContainsEmailAddress, s("help@example.com"))));
        assert!(!parse_semantic("12 34").iter().any(|(p, _)| *p == ContainsPhoneNumber));
    }

    #[test]
    fn temperature_and_negative() {
        let got = parse_semantic("Low -3°C");
        assert!(got.contains(&(ContainsTemperature, num(-3.0))));
        assert!(got.contains(&(ContainsNumber, num(-3.0))));
    }

    #[test]
    fn numbers_glued_to_letters_ignored() {
        assert!(parse_semantic("A320 v2").is_empty());
        assert_eq!(parse_semantic("6"), [(ContainsNumber, num(6.0))].into());
    }

    #[test]
    fn toggles_filter() {
        let toggles = SemanticToggles { number: false, ..Default::default() };
        assert_eq!(parse_semantic_with("$3", &toggles), [(ContainsMoney, num(3.0))].into());
    }
}
