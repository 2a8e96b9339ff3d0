//! Browser shortcuts, fixture sites and waiting.

mod common;

use std::cell::RefCell;
use std::sync::Arc;
use std::time::Duration;

use proptest::prelude::*;

use visq_core::engine::{Engine, EvalError, QueryEngine, ResultSet, ScoredElement};
use visq_core::interact::{
    Browser, Clock, FixtureBackend, InteractError, Manifest, Payload, Target, Verb, VirtualClock,
};
use visq_core::query::{parse_query, Predicate};
use visq_core::script::{self, Binding, Script};
use visq_core::snapshot::PageSnapshot;

use common::{fixture, fixture_path};

/// Delegates to the real engine but answers `find_first` with a fixed
/// element, recording every predicate it was asked about.
struct Recording {
    inner: Engine,
    answer: &'static str,
    asked: RefCell<Vec<Predicate>>,
}

impl QueryEngine for Recording {
    fn evaluate(
        &self,
        snapshot: &PageSnapshot,
        predicate: &Predicate,
    ) -> Result<ResultSet, EvalError> {
        self.inner.evaluate(snapshot, predicate)
    }

    fn find_first(
        &self,
        snapshot: &PageSnapshot,
        predicate: &Predicate,
    ) -> Result<Option<ScoredElement>, EvalError> {
        self.asked.borrow_mut().push(predicate.clone());
        let pick = parse_query(&format!("css(\"[data-vq-id={}]\")", self.answer)).unwrap();
        Ok(self.inner.evaluate(snapshot, &pick)?.first().cloned())
    }
}

fn product() -> FixtureBackend {
    FixtureBackend::load(fixture_path("product")).unwrap()
}

#[test]
fn shortcuts_act_on_what_find_first_returns() {
    let engine = Recording {
        inner: Engine::default(),
        answer: "price",
        asked: RefCell::new(Vec::new()),
    };
    let mut b = Browser::with_engine(product(), engine);
    let el = b.type_text("Description", "Blue Shoes").unwrap();
    assert_eq!(el.id, "price");
    let asked = b.engine().asked.borrow().clone();
    let want = Browser::<FixtureBackend>::shortcut_predicate(
        Verb::Type,
        &Target::Text("Description".into()),
    );
    assert_eq!(asked, [want.unwrap()]);
    assert_eq!(b.backend().journal()[0].element.as_deref(), Some("price"));
}

#[test]
fn product_form_flow() {
    let mut b = Browser::new(product());
    assert_eq!(b.type_text("Description", "Blue Shoes").unwrap().id, "desc");
    assert_eq!(b.click("Add").unwrap().id, "add");
    let journal = b.backend().journal();
    assert_eq!(journal.len(), 2);
    let submitted = journal[1].submitted.as_ref().unwrap();
    assert_eq!(
        submitted.get("description").map(String::as_str),
        Some("Blue Shoes")
    );
    assert_eq!(journal[1].navigated_to.as_deref(), Some("product_list"));
    assert_eq!(b.backend().current_name(), "product_list");
    let hit = b
        .find_first(&Predicate::Contains("Blue Shoes".into()))
        .unwrap()
        .unwrap();
    assert_eq!(hit.id, "p2");
}

#[test]
fn missing_targets_and_wrong_kinds_fail() {
    let mut b = Browser::new(product());
    assert!(matches!(
        b.click("Checkout"),
        Err(InteractError::ElementNotFound { .. })
    ));
    assert!(matches!(
        b.click(Target::Element("nope".into())),
        Err(InteractError::UnknownElement(_))
    ));
    assert!(b.choose(Target::Element("desc".into()), "x").is_err());
    assert!(b.backend().journal().is_empty());
}

#[test]
fn migration_journal_replays_on_a_fresh_site() {
    let dir = fixture_path("blog");
    let clock: Arc<dyn Clock> = Arc::new(VirtualClock::new());
    let backend = FixtureBackend::load(&dir)
        .unwrap()
        .with_clock(clock.clone());
    let mut b = Browser::new(backend).with_clock(clock);
    let text = std::fs::read_to_string(dir.join("migrate.vq")).unwrap();
    script::run(&mut b, &Script::parse(&text).unwrap(), &mut |_| {}).unwrap();
    let recorded = b.backend().journal().to_vec();
    assert!(recorded
        .iter()
        .enumerate()
        .all(|(i, e)| e.seq == i as u64 + 1));
    let mut fresh = FixtureBackend::load(&dir).unwrap();
    fresh.replay(&recorded).unwrap();
    assert_eq!(fresh.journal(), recorded.as_slice());
    assert_eq!(fresh.current_name(), b.backend().current_name());
}

#[test]
fn wait_script_binds_the_field() {
    let clock: Arc<dyn Clock> = Arc::new(VirtualClock::new());
    let backend = FixtureBackend::load(fixture_path("waitfor"))
        .unwrap()
        .with_clock(clock.clone());
    let mut b = Browser::new(backend).with_clock(clock.clone());
    let text = std::fs::read_to_string(fixture_path("waitfor/wait.vq")).unwrap();
    let vars = script::run(&mut b, &Script::parse(&text).unwrap(), &mut |_| {}).unwrap();
    assert!(matches!(&vars["user"], Binding::Element(e) if e.id == "user"));
    let last = b.backend().journal().last().unwrap().clone();
    assert_eq!(last.element.as_deref(), Some("user"));
    assert_eq!(last.payload, Some(Payload::text("admin")));
    assert_eq!(clock.now(), Duration::from_secs(2));
}

fn never_ready(clock: Arc<dyn Clock>) -> FixtureBackend {
    let manifest = Manifest::from_json(
        r#"{"formatVersion": 1, "start": "loading", "snapshots": {"loading": "loading.json"},
            "transitions": [], "timedTransitions": []}"#,
    )
    .unwrap();
    let pages = [("loading".to_owned(), fixture("waitfor/loading.json"))]
        .into_iter()
        .collect();
    FixtureBackend::from_parts(manifest, pages)
        .unwrap()
        .with_clock(clock)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn wait_timeout_polls_round_up(millis in 1u64..9000) {
        let clock: Arc<dyn Clock> = Arc::new(VirtualClock::new());
        let mut b = Browser::new(never_ready(clock.clone())).with_clock(clock.clone());
        let q = parse_query(r#"typable("username")"#).unwrap();
        let timeout = Duration::from_millis(millis);
        match b.wait_for(&q, timeout) {
            Err(InteractError::Timeout { polls, .. }) => {
                prop_assert_eq!(u64::from(polls), millis.div_ceil(1000));
                prop_assert_eq!(clock.now(), timeout);
            }
            other => prop_assert!(false, "{:?}", other),
        }
    }
}

#[test]
fn zero_timeout_is_rejected() {
    let clock: Arc<dyn Clock> = Arc::new(VirtualClock::new());
    let mut b = Browser::new(never_ready(clock.clone())).with_clock(clock);
    let q = parse_query("text()").unwrap();
    assert!(matches!(
        b.wait_for(&q, Duration::ZERO),
        Err(InteractError::InvalidTimeout)
    ));
}
