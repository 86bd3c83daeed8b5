use serde::{Deserialize, Serialize};

use crate::radio::{CellId, MeasurementReport};

/// A RAN function advertised by an E2 node at setup time.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RanFunction {
    pub id: u16,
    pub name: String,
    pub description: String,
}

impl RanFunction {
    pub fn new(id: u16, name: &str, description: &str) -> Self {
        Self { id, name: name.to_owned(), description: description.to_owned() }
    }
}

pub const KPM_FUNCTION_NAME: &str = "KPM";
pub const HO_FUNCTION_NAME: &str = "HO";

/// Functions exposed by every simulated gNodeB.
pub fn standard_functions() -> Vec<RanFunction> {
    vec![
        RanFunction::new(1, KPM_FUNCTION_NAME, "per-UE RSRP/SINR/CQI measurement reports"),
        RanFunction::new(2, HO_FUNCTION_NAME, "handover execution with time-to-trigger"),
    ]
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct HandoverCommand {
    pub target_cell: CellId,
    pub ttt_ms: u32,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum ControlStatus {
    Success,
    Failure,
}

impl ControlStatus {
    pub(crate) fn code(self) -> u8 {
        match self {
            ControlStatus::Success => 0,
            ControlStatus::Failure => 1,
        }
    }

    pub(crate) fn from_code(code: u8) -> Option<Self> {
        match code {
            0 => Some(ControlStatus::Success),
            1 => Some(ControlStatus::Failure),
            _ => None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum E2Message {
    E2SetupRequest { node_id: u32, ran_functions: Vec<RanFunction> },
    E2SetupResponse { node_id: u32, accepted: bool },
    /// `requestor_id` is assigned by the RIC and becomes the subscription id.
    RicSubscriptionRequest { requestor_id: u32, ran_function_id: u16, report_period_ms: u32 },
    RicSubscriptionResponse { subscription_id: u32, accepted: bool },
    RicIndication { subscription_id: u32, report: MeasurementReport },
    RicControlRequest { node_id: u32, ue_id: u32, control: HandoverCommand },
    RicControlAck { status: ControlStatus },
}

impl E2Message {
    pub fn type_tag(&self) -> u8 {
        match self {
            E2Message::E2SetupRequest { .. } => 0x01,
            E2Message::E2SetupResponse { .. } => 0x02,
            E2Message::RicSubscriptionRequest { .. } => 0x03,
            E2Message::RicSubscriptionResponse { .. } => 0x04,
            E2Message::RicIndication { .. } => 0x05,
            E2Message::RicControlRequest { .. } => 0x06,
            E2Message::RicControlAck { .. } => 0x07,
        }
    }

    pub fn name(&self) -> &'static str {
        match self {
            E2Message::E2SetupRequest { .. } => "E2SetupRequest",
            E2Message::E2SetupResponse { .. } => "E2SetupResponse",
            E2Message::RicSubscriptionRequest { .. } => "RicSubscriptionRequest",
            E2Message::RicSubscriptionResponse { .. } => "RicSubscriptionResponse",
            E2Message::RicIndication { .. } => "RicIndication",
            E2Message::RicControlRequest { .. } => "RicControlRequest",
            E2Message::RicControlAck { .. } => "RicControlAck",
        }
    }
}
