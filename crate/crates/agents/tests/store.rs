mod common;

use common::*;
use sheetmind_agents::orchestrator::{Ablation, PipelineConfig, SessionStore, StoreError};
use sheetmind_core::Workbook;

fn config() -> PipelineConfig {
    PipelineConfig {
        test_mode: true,
        ..PipelineConfig::with_ablation(Ablation::NO_MANAGER)
    }
}

#[test]
fn create_save_load_round_trip() {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::open(dir.path()).unwrap();
    let mut s = store.create(times_workbook(), config()).unwrap();
    let b = scripted(&[WORKED_ACTION, "VALID", "OK"]);
    s.run_instruction(&b, WORKED_INSTRUCTION);
    store.save(&s).unwrap();

    let loaded = store.load(&s.id).unwrap();
    assert_eq!(loaded.workbook, s.workbook);
    assert_eq!(loaded.transcript, s.transcript);
    assert_eq!(loaded.config, s.config);
    assert_eq!(loaded.turn, 1);
    assert_eq!(loaded.workbook.version(), s.workbook.version());

    let files = ["workbook.json", "transcript.jsonl", "config.json", "checksums.txt"];
    let before: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(dir.path().join(&s.id).join(f)).unwrap()).collect();
    store.save(&loaded).unwrap();
    let after: Vec<Vec<u8>> = files.iter().map(|f| std::fs::read(dir.path().join(&s.id).join(f)).unwrap()).collect();
    assert_eq!(before, after, "re-saving a loaded session is byte-identical");
    assert_eq!(store.list().unwrap(), vec![s.id.clone()]);
}

#[test]
fn truncated_transcript_is_corrupt() {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::open(dir.path()).unwrap();
    let mut s = store.create(times_workbook(), config()).unwrap();
    s.run_instruction(&scripted(&[WORKED_ACTION, "VALID", "OK"]), WORKED_INSTRUCTION);
    store.save(&s).unwrap();
    let path = dir.path().join(&s.id).join("transcript.jsonl");
    let text = std::fs::read_to_string(&path).unwrap();
    std::fs::write(&path, &text[..text.len() / 2]).unwrap();
    let err = store.load(&s.id).unwrap_err();
    assert_eq!(err.code(), "corrupt-store");
    assert!(matches!(err, StoreError::Corrupt { ref file, .. } if file == "transcript.jsonl"));
}

#[test]
fn ids_are_distinct_and_collisions_detected() {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::open(dir.path()).unwrap();
    let a = store.create(Workbook::new(), config()).unwrap();
    let b = store.create(Workbook::new(), config()).unwrap();
    assert_ne!(a.id, b.id);
    let err = store.create_with_id(&a.id, Workbook::new(), config()).unwrap_err();
    assert_eq!(err.code(), "id-collision");
    assert_eq!(store.load("../etc").unwrap_err().code(), "invalid-id");
    assert_eq!(store.load("nope").unwrap_err().code(), "not-found");
}

#[test]
fn concurrent_creates_do_not_clash() {
    let dir = tempfile::tempdir().unwrap();
    let store = SessionStore::open(dir.path()).unwrap();
    let ids: Vec<String> = std::thread::scope(|scope| {
        let handles: Vec<_> = (0..8)
            .map(|_| scope.spawn(|| store.create(times_workbook(), config()).unwrap().id))
            .collect();
        handles.into_iter().map(|h| h.join().unwrap()).collect()
    });
    let mut unique = ids.clone();
    unique.sort();
    unique.dedup();
    assert_eq!(unique.len(), 8);
    for id in ids {
        assert_eq!(store.load(&id).unwrap().workbook, times_workbook());
    }
}
