use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use scmn::ensemble::{sample_graph, EnsembleError, EnsembleParams, TannerGraph};

fn small() -> (TannerGraph, String) {
    let p = EnsembleParams::new(4, 2, 2, 2, 2).unwrap();
    let g = sample_graph(&p, 8, 2, &mut ChaCha8Rng::seed_from_u64(3)).unwrap();
    let text = g.to_text();
    (g, text)
}

fn parse_line(text: &str) -> usize {
    match TannerGraph::from_text(text) {
        Err(EnsembleError::Parse { line, .. }) => line,
        other => panic!("expected a parse error, got {other:?}"),
    }
}

fn replace_line(text: &str, index: usize, with: &str) -> String {
    let mut lines: Vec<&str> = text.lines().collect();
    lines[index] = with;
    lines.join("\n") + "\n"
}

#[test]
fn comments_and_blank_lines_are_ignored() {
    let (g, text) = small();
    let annotated = format!("# sampled with seed 3\n\n{}", text.replace("checks", "\nchecks"));
    assert_eq!(TannerGraph::from_text(&annotated).unwrap(), g);
}

#[test]
fn unsorted_ids_parse_to_the_same_graph() {
    let (g, text) = small();
    let line = text.lines().nth(3).unwrap();
    let fields: Vec<&str> = line.split('|').collect();
    let mut ids: Vec<&str> = fields[2].split_whitespace().collect();
    ids.reverse();
    let swapped = replace_line(&text, 3, &format!("{}|{}| {}", fields[0], fields[1], ids.join(" ")));
    assert_eq!(TannerGraph::from_text(&swapped).unwrap(), g);
}

#[test]
fn rejects_bad_header_and_params() {
    let (_, text) = small();
    assert_eq!(parse_line(&text.replacen("scmn-graph 1", "scmn-graph 9", 1)), 1);
    assert_eq!(parse_line(&text.replacen("params 4 2 2 2 2 8 2", "params 4 2 2 2 2 8", 1)), 2);
    assert!(TannerGraph::from_text(&text.replacen("params 4 2 2 2 2 8 2", "params 4 2 2 2 2 7 2", 1)).is_err());
    assert!(TannerGraph::from_text("").is_err());
}

#[test]
fn rejects_wrong_degrees() {
    let (g, text) = small();
    // dropping one transmitted socket leaves a bit of degree 1
    let line = text.lines().skip(3).position(|l| l.rsplit('|').next().unwrap().trim().contains(' ')).unwrap() + 3;
    let original = text.lines().nth(line).unwrap();
    let (head, tail) = original.rsplit_once('|').unwrap();
    let shortened: Vec<&str> = tail.split_whitespace().skip(1).collect();
    let broken = replace_line(&text, line, &format!("{head}| {}", shortened.join(" ")));
    assert!(TannerGraph::from_text(&broken).is_err());
    assert_eq!(g.edges().len(), TannerGraph::from_text(&text).unwrap().edges().len());
}

#[test]
fn rejects_edges_outside_the_window() {
    let (_, text) = small();
    // the first check sits at section -2; transmitted bit 39 lives at section +2
    let first = text.lines().nth(3).unwrap();
    let (head, tail) = first.rsplit_once('|').unwrap();
    let mut ids: Vec<&str> = tail.split_whitespace().collect();
    ids.push("39");
    assert_eq!(parse_line(&replace_line(&text, 3, &format!("{head}| {}", ids.join(" ")))), 4);
}

#[test]
fn rejects_bad_symbols() {
    let (g, text) = small();
    let first_symbol = 3 + g.num_checks() + 1;
    let sym = text.lines().nth(first_symbol).unwrap();
    let (section, _) = sym.split_once('|').unwrap();
    // duplicate bit across symbols
    let other = text.lines().nth(first_symbol + 1).unwrap();
    let dup = replace_line(&text, first_symbol + 1, &format!("{section}| {}", sym.split_once('|').unwrap().1.trim()));
    assert!(other != sym);
    assert_eq!(parse_line(&dup), first_symbol + 2);
    // wrong width
    let narrow = replace_line(&text, first_symbol, &format!("{section}| {}", g.symbol(0)[0]));
    assert_eq!(parse_line(&narrow), first_symbol + 1);
    // mismatched section label
    let relabelled = replace_line(&text, first_symbol, &format!("7 | {} {}", g.symbol(0)[0], g.symbol(0)[1]));
    assert_eq!(parse_line(&relabelled), first_symbol + 1);
    // truncated
    let truncated: String = text.lines().take(first_symbol + 1).map(|l| format!("{l}\n")).collect();
    assert!(TannerGraph::from_text(&truncated).is_err());
    // trailing junk
    assert!(TannerGraph::from_text(&format!("{text}0 | 1 2\n")).is_err());
}
