// scratch probe
use drfdr::problems::{generate_lrmc, save_json, load_json, LrmcInstance};

fn main() {
    let dir = std::env::temp_dir().join("probe-json");
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("lrmc.json");
    let inst = generate_lrmc(3, 12, 2, 0.5, 1e-4).unwrap();
    save_json(&inst, &path).unwrap();
    let back: LrmcInstance = load_json(&path).unwrap();
    println!("shapes: {:?} vs {:?}", inst.ground_truth.shape(), back.ground_truth.shape());
    let mut diffs = 0;
    for (a, b) in inst.ground_truth.iter().zip(back.ground_truth.iter()) {
        if a != b { diffs += 1; if diffs < 4 { println!("{a:.17e} vs {b:.17e}"); } }
    }
    println!("diff entries: {diffs}");
    println!("mask eq: {}", inst.mask.entries == back.mask.entries);
}
