use specbench::report::{parse_leaderboards, Leaderboard};
use specbench::robustness::Track;

fn board() -> Leaderboard {
    // listed out of order on purpose
    Leaderboard::new(
        Track::Clean,
        [
            ("OrangeCat".to_string(), 0.03231, 0.01389),
            ("IPIC_SSR".to_string(), 0.03010, 0.01293),
            ("MDISL-lab".to_string(), 0.03075, 0.01268),
        ],
    )
}

#[test]
fn mrae_decides_rank_not_rmse() {
    let b = Leaderboard::new(
        Track::Clean,
        [("worse-rmse".to_string(), 0.0301, 0.9), ("better-rmse".to_string(), 0.0323, 0.001)],
    );
    let order: Vec<_> = b.rows.iter().map(|r| (r.rank, r.method.as_str())).collect();
    assert_eq!(order, [(1, "worse-rmse"), (2, "better-rmse")]);
}

#[test]
fn three_method_markdown() {
    assert_eq!(
        board().to_markdown(),
        "| Rank | Method | MRAE | RMSE |\n\
         |-----:|:-------|-----:|-----:|\n\
         | 1 | IPIC_SSR | 0.03010 | 0.01293 |\n\
         | 2 | MDISL-lab | 0.03075 | 0.01268 |\n\
         | 3 | OrangeCat | 0.03231 | 0.01389 |\n"
    );
}

#[test]
fn three_method_text() {
    let text = board().to_text();
    let lines: Vec<_> = text.lines().collect();
    assert_eq!(lines.len(), 4, "{text}");
    assert!(lines[0].starts_with("Rank"), "{text}");
    assert!(lines[1].contains("IPIC_SSR") && lines[1].contains("0.03010") && lines[1].contains("0.01293"));
    assert!(lines[3].contains("OrangeCat") && lines[3].contains("0.03231"));
    let widths: Vec<_> = lines.iter().map(|l| l.trim_end().len()).collect();
    assert!(widths.windows(2).all(|w| w[0] == w[1]), "{text}");
    assert_eq!(text, board().to_text());
}

#[test]
fn three_method_csv() {
    let csv = board().to_csv(&["config_hash=abc".to_string()]);
    assert_eq!(
        csv,
        "# config_hash=abc\n\
         # leaderboard v1\n\
         track,rank,method,mrae,rmse\n\
         clean,1,IPIC_SSR,0.0301,0.01293\n\
         clean,2,MDISL-lab,0.03075,0.01268\n\
         clean,3,OrangeCat,0.03231,0.01389\n"
    );
    assert_eq!(parse_leaderboards(&csv).unwrap(), vec![board()]);
}
