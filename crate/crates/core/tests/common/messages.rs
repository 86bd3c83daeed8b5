//! Message generators and golden vectors shared by the codec tests.

use proptest::prelude::*;

use ricsim::e2::{ControlStatus, E2Message, HandoverCommand, RanFunction};
use ricsim::radio::{CellId, MeasurementReport, RsrpEntry, UeId};
use ricsim::sim::SimTime;

pub fn golden_messages() -> Vec<(&'static str, E2Message)> {
    vec![
        (
            "E2SetupRequest",
            E2Message::E2SetupRequest { node_id: 1, ran_functions: vec![RanFunction::new(1, "KPM", "kpm")] },
        ),
        ("E2SetupResponse", E2Message::E2SetupResponse { node_id: 1, accepted: true }),
        (
            "RicSubscriptionRequest",
            E2Message::RicSubscriptionRequest { requestor_id: 5, ran_function_id: 1, report_period_ms: 1000 },
        ),
        ("RicSubscriptionResponse", E2Message::RicSubscriptionResponse { subscription_id: 5, accepted: false }),
        (
            "RicIndication",
            E2Message::RicIndication {
                subscription_id: 5,
                report: MeasurementReport {
                    ue: UeId(7),
                    t: SimTime::from_ms(3000),
                    serving: CellId(2),
                    entries: vec![
                        RsrpEntry { cell: CellId(1), rsrp_dbm: -95.5 },
                        RsrpEntry { cell: CellId(2), rsrp_dbm: -80.25 },
                    ],
                    sinr_db: 3.5,
                    cqi: 5,
                },
            },
        ),
        (
            "RicControlRequest",
            E2Message::RicControlRequest {
                node_id: 2,
                ue_id: 7,
                control: HandoverCommand { target_cell: CellId(3), ttt_ms: 2000 },
            },
        ),
        ("RicControlAck", E2Message::RicControlAck { status: ControlStatus::Failure }),
    ]
}

fn unhex(s: &str) -> Vec<u8> {
    (0..s.len()).step_by(2).map(|i| u8::from_str_radix(&s[i..i + 2], 16).unwrap()).collect()
}

pub fn golden_vectors() -> Vec<(String, Vec<u8>)> {
    include_str!("../../testdata/e2_golden.txt")
        .lines()
        .filter(|l| !l.starts_with('#') && !l.trim().is_empty())
        .map(|l| {
            let (name, hex) = l.split_once(' ').unwrap();
            (name.to_owned(), unhex(hex.trim()))
        })
        .collect()
}

fn any_string() -> impl Strategy<Value = String> {
    prop_oneof![Just(String::new()), "[a-zA-Z0-9 _-]{1,24}", "\\PC{0,8}"]
}

fn any_finite() -> impl Strategy<Value = f64> {
    prop_oneof![-200.0f64..50.0, Just(0.0), Just(-0.0), any::<f64>().prop_filter("finite", |x| x.is_finite())]
}

fn any_report() -> impl Strategy<Value = MeasurementReport> {
    (any::<u32>(), any::<u64>(), any::<u32>(), prop::collection::vec((any::<u32>(), any_finite()), 0..6), any_finite(), 0u8..=15)
        .prop_map(|(ue, t, serving, entries, sinr_db, cqi)| MeasurementReport {
            ue: UeId(ue),
            t: SimTime::from_ms(t),
            serving: CellId(serving),
            entries: entries.into_iter().map(|(c, r)| RsrpEntry { cell: CellId(c), rsrp_dbm: r }).collect(),
            sinr_db,
            cqi,
        })
}

pub fn any_message() -> impl Strategy<Value = E2Message> {
    prop_oneof![
        (any::<u32>(), prop::collection::vec((any::<u16>(), any_string(), any_string()), 0..4)).prop_map(|(node_id, fs)| {
            E2Message::E2SetupRequest {
                node_id,
                ran_functions: fs.into_iter().map(|(id, name, description)| RanFunction { id, name, description }).collect(),
            }
        }),
        (any::<u32>(), any::<bool>()).prop_map(|(node_id, accepted)| E2Message::E2SetupResponse { node_id, accepted }),
        (any::<u32>(), any::<u16>(), any::<u32>()).prop_map(|(requestor_id, ran_function_id, report_period_ms)| {
            E2Message::RicSubscriptionRequest { requestor_id, ran_function_id, report_period_ms }
        }),
        (any::<u32>(), any::<bool>())
            .prop_map(|(subscription_id, accepted)| E2Message::RicSubscriptionResponse { subscription_id, accepted }),
        (any::<u32>(), any_report()).prop_map(|(subscription_id, report)| E2Message::RicIndication { subscription_id, report }),
        (any::<u32>(), any::<u32>(), any::<u32>(), any::<u32>()).prop_map(|(node_id, ue_id, cell, ttt_ms)| {
            E2Message::RicControlRequest { node_id, ue_id, control: HandoverCommand { target_cell: CellId(cell), ttt_ms } }
        }),
        any::<bool>().prop_map(|ok| E2Message::RicControlAck {
            status: if ok { ControlStatus::Success } else { ControlStatus::Failure }
        }),
    ]
}
