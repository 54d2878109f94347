use indexmap::IndexMap;
use thiserror::Error;

use crate::kb::{Dataset, DocumentId, GoldAccess, Polarity, ToolId};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum EvalError {
    #[error("document '{0}' has no gold label")]
    MissingGold(DocumentId),
    #[error("prediction for unknown document '{0}'")]
    UnknownDocument(DocumentId),
    #[error("nothing to evaluate")]
    Empty,
    #[error("unknown tool '{0}'")]
    UnknownTool(ToolId),
}

/// Fraction of predicted documents whose prediction equals gold.
pub fn evaluate(ds: &Dataset, predictions: &IndexMap<DocumentId, Polarity>) -> Result<f64, EvalError> {
    if predictions.is_empty() {
        return Err(EvalError::Empty);
    }
    let access = GoldAccess::grant();
    let mut correct = 0usize;
    for (id, p) in predictions {
        let doc = ds.document(id).ok_or_else(|| EvalError::UnknownDocument(id.clone()))?;
        let gold = doc.gold(&access).ok_or_else(|| EvalError::MissingGold(id.clone()))?;
        correct += usize::from(gold == *p);
    }
    Ok(correct as f64 / predictions.len() as f64)
}

/// Accuracy of one tool's raw labels over the documents it labeled.
pub fn tool_accuracy(ds: &Dataset, tool: &ToolId) -> Result<f64, EvalError> {
    if !ds.tools().contains(tool) {
        return Err(EvalError::UnknownTool(tool.clone()));
    }
    let preds: IndexMap<DocumentId, Polarity> = ds
        .labels()
        .iter()
        .filter(|l| &l.tool == tool)
        .map(|l| (l.doc.clone(), l.polarity))
        .collect();
    evaluate(ds, &preds)
}

/// Gold labels, when every document has one.
pub fn gold_labels(ds: &Dataset) -> Option<IndexMap<DocumentId, Polarity>> {
    let access = GoldAccess::grant();
    ds.documents().iter().map(|d| d.gold(&access).map(|g| (d.id.clone(), g))).collect()
}

pub fn has_full_gold(ds: &Dataset) -> bool {
    !ds.is_empty() && ds.documents().iter().all(|d| d.has_gold())
}
