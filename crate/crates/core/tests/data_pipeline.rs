// SPDX-License-Identifier: Apache-2.0

use dataring::data::{
    build_domain, dataset_to_table, load_dataset, read_csv, read_manifest, write_manifest,
    Attribute, Domain, HistogramDataset, Schema,
};
use dataring::query::encode_query;
use dataring::Seed;
use std::io::BufReader;

const LOANS: &str = "\
Gen,Home,Loan
F,Rent,10K
M,Own,20K
M,Rent,10K
F,Own,20K
";

#[test]
fn loan_example_dot_product() {
    let schema = Schema::new(vec![
        Attribute::categorical("Gen", ["F", "M"]).unwrap(),
        Attribute::categorical("Home", ["Rent", "Own"]).unwrap(),
        Attribute::categorical("Loan", ["10K", "20K"]).unwrap(),
    ])
    .unwrap();
    let domain = Domain::full(schema).unwrap();
    let rep = load_dataset(&read_csv(LOANS.as_bytes()).unwrap(), &domain).unwrap();
    assert_eq!(rep.rows, 4);
    assert_eq!(rep.duplicates, 0);
    let hist: Vec<u8> = (0..8).map(|l| rep.dataset.val(l)).collect();
    assert_eq!(hist, [1, 0, 0, 1, 1, 0, 0, 1]);
    let sel = domain.labels_where("Loan", "10K").unwrap();
    let q = encode_query(&sel, 8).unwrap();
    assert_eq!(q.answer(&rep.dataset).unwrap(), 2);
}

#[test]
fn csv_domain_manifest_bits_roundtrip() {
    let mut csv = String::from("age,city,plan\n");
    let cities = ["Oslo", "Lima", "Pune", "Kiev", "Baku"];
    for i in 0..300u64 {
        let age = 18 + (i * 7919) % 60;
        csv.push_str(&format!(
            "{age},{},{}\n",
            cities[(i as usize * 31) % 5],
            ["a", "b", "c"][(i % 3) as usize]
        ));
    }
    let table = read_csv(csv.as_bytes()).unwrap();
    let schema = table.infer_codes(&["age"]).unwrap();
    let full = Domain::full(schema.clone()).unwrap();
    let codes: Vec<u64> = load_dataset(&table, &full)
        .unwrap()
        .dataset
        .labels()
        .into_iter()
        .map(|l| full.code_of_label(l).unwrap())
        .collect();
    let domain = build_domain(schema, &codes, 4, Seed(77)).unwrap();
    assert_eq!(domain.size(), 4 * codes.len());

    let mut buf = Vec::new();
    write_manifest(&domain, &mut buf).unwrap();
    let back = read_manifest(BufReader::new(&buf[..])).unwrap();
    assert_eq!(back.size(), domain.size());
    for l in 0..domain.size() as u32 {
        assert_eq!(back.code_of_label(l), domain.code_of_label(l));
    }

    let ds = load_dataset(&table, &back).unwrap().dataset;
    assert_eq!(ds.len(), codes.len());
    let img = ds.to_bit_image();
    assert_eq!(img.len(), 8 + domain.size().div_ceil(8));
    assert_eq!(
        HistogramDataset::from_bit_image(&img, domain.size()).unwrap(),
        ds
    );

    let mut out = Vec::new();
    dataset_to_table(&ds, &back).write(&mut out).unwrap();
    let again = load_dataset(&read_csv(&out[..]).unwrap(), &back)
        .unwrap()
        .dataset;
    assert_eq!(again, ds);
}

#[test]
fn rows_outside_the_domain_are_rejected() {
    let schema = Schema::new(vec![Attribute::categorical("x", ["a", "b"]).unwrap()]).unwrap();
    let domain = Domain::full(schema).unwrap();
    let err = load_dataset(&read_csv("x\na\nz\n".as_bytes()).unwrap(), &domain).unwrap_err();
    assert!(err.to_string().contains("row 2"), "{err}");
}
