use whow_core::corpus::segment_text;

const PARAGRAPHS: &str = include_str!("fixtures/segmentation_input.txt");
const EXPECTED: &str = include_str!("fixtures/segmentation_expected.txt");

#[test]
fn hand_segmented_fixture() {
    let got: Vec<String> = PARAGRAPHS
        .split("\n\n")
        .flat_map(|p| segment_text(&p.replace('\n', " ")))
        .map(|s| s.text)
        .collect();
    let want: Vec<&str> = EXPECTED.lines().filter(|l| !l.is_empty()).collect();
    assert_eq!(want.len(), 20);
    assert_eq!(got, want);
}
