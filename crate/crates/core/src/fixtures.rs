//! Bundled worked examples: the two-sentence crime story, its expected
//! consensus, and a fire-fighting paragraph. Used by the mock backend and by
//! tests across the workspace.

use crate::model::{SituationLabel, WorkspaceInstance};
use crate::oracle::mock::{mock_lookup, FixtureStore};
use crate::schema;

pub const OPERATOR_FIXTURES_JSONL: &str = include_str!("../fixtures/operator_fixtures.jsonl");
pub const CRIME_STORY_JSONL: &str = include_str!("../fixtures/crime_story.jsonl");
pub const CRIME_STORY_CONSENSUS_JSON: &str = include_str!("../fixtures/crime_story.consensus.json");

pub const S1_TEXT: &str = "Yesterday, in a swift response to a reported robbery, law enforcement officers apprehended Johnathan Miller, a 32-year-old resident of Greenview Avenue, in the downtown area.";
pub const S2_TEXT: &str = "Police swiftly acted on the provided descriptions, locating and arresting Miller within the hour.";
pub const CROSS_TEXT: &str = "After a gender reveal party gone wrong, 10 units of the LAFD were sent to handle the fire at the scene. The gender reveal party caused over a million acres to the engulfed in flames in South Savannah, causing billions of dollars in damages and loss of property.";

fn recorded(context: &str, situation: SituationLabel) -> WorkspaceInstance {
    mock_lookup(&FixtureStore::bundled(), context, &situation).instance
}

/// Operator output for the first crime-story sentence.
pub fn s1_instance() -> WorkspaceInstance {
    recorded(S1_TEXT, SituationLabel::crime_and_justice())
}

/// Operator output for the second crime-story sentence (before aliasing).
pub fn s2_instance() -> WorkspaceInstance {
    recorded(S2_TEXT, SituationLabel::crime_and_justice())
}

pub fn cross_instance() -> WorkspaceInstance {
    recorded(CROSS_TEXT, SituationLabel::fire_fighting())
}

/// Expected consensus after running the crime story one sentence per
/// segment with mock backends.
pub fn crime_story_consensus() -> WorkspaceInstance {
    let mut w = schema::parse_canonical(CRIME_STORY_CONSENSUS_JSON, &SituationLabel::crime_and_justice())
        .expect("bundled consensus parses")
        .instance;
    w.canonicalize();
    w
}
