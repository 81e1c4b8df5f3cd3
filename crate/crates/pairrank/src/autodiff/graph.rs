//! Define-by-run tape.
//!
//! Every forward pass builds a fresh [`Graph`]. Operations append records in
//! execution order; [`Graph::backward`] walks them in reverse, which is a
//! reverse topological order by construction, visiting each record exactly
//! once. Gradients of intermediate tensors live in a per-call map and are
//! dropped afterwards; leaf tensors with `requires_grad` accumulate into
//! their persistent grad buffers, so repeated backward calls add up.

use std::collections::HashMap;

use super::tensor::Tensor;
use crate::error::{Error, Result};

type BackwardFn = Box<dyn Fn(&[f64]) -> Vec<Option<Vec<f64>>>>;

struct Record {
    inputs: Vec<Tensor>,
    output: Tensor,
    backward: BackwardFn,
}

pub struct Graph {
    recording: bool,
    records: Vec<Record>,
}

impl Graph {
    /// Graph that records operations for a later backward pass.
    pub fn recording() -> Graph {
        Graph {
            recording: true,
            records: Vec::new(),
        }
    }

    /// Forward-only graph: no records, no gradient bookkeeping.
    pub fn inference() -> Graph {
        Graph {
            recording: false,
            records: Vec::new(),
        }
    }

    pub fn is_recording(&self) -> bool {
        self.recording
    }

    pub fn num_records(&self) -> usize {
        self.records.len()
    }

    /// Wraps raw op output into a tensor and records the backward closure
    /// when gradients must flow. The closure receives the output gradient
    /// and returns one optional gradient per input, in order.
    pub(crate) fn emit<F>(
        &mut self,
        inputs: &[&Tensor],
        shape: Vec<usize>,
        data: Vec<f64>,
        backward: F,
    ) -> Tensor
    where
        F: Fn(&[f64]) -> Vec<Option<Vec<f64>>> + 'static,
    {
        let tracked = self.recording && inputs.iter().any(|t| t.is_tracked());
        let out = Tensor::op_output(shape, data, tracked);
        if tracked {
            self.records.push(Record {
                inputs: inputs.iter().map(|&t| t.clone()).collect(),
                output: out.clone(),
                backward: Box::new(backward),
            });
        }
        out
    }

    /// Backpropagates from a scalar loss. Populates `grad` on every
    /// reachable `requires_grad` tensor.
    pub fn backward(&self, loss: &Tensor) -> Result<()> {
        if loss.len() != 1 {
            return Err(Error::invalid(format!(
                "backward requires a scalar loss, got shape {:?}",
                loss.shape()
            )));
        }
        if !loss.is_tracked() {
            return Err(Error::invalid(
                "backward on an untracked tensor: nothing requires_grad upstream \
                 or the graph is in inference mode",
            ));
        }

        // Gradients of non-leaf tensors, keyed by tensor identity.
        let mut flow: HashMap<usize, Vec<f64>> = HashMap::new();
        let mut route = |t: &Tensor, delta: Vec<f64>| {
            if t.requires_grad() {
                t.accumulate_grad(&delta);
            } else {
                flow.entry(t.key())
                    .and_modify(|buf| {
                        for (b, d) in buf.iter_mut().zip(&delta) {
                            *b += d;
                        }
                    })
                    .or_insert(delta);
            }
        };
        route(loss, vec![1.0]);

        for rec in self.records.iter().rev() {
            let out_grad = if rec.output.requires_grad() {
                // A leaf is never an op output; defensive only.
                continue;
            } else {
                match flow.remove(&rec.output.key()) {
                    Some(g) => g,
                    None => continue, // not on a path to the loss
                }
            };
            let input_grads = (rec.backward)(&out_grad);
            debug_assert_eq!(input_grads.len(), rec.inputs.len());
            for (input, grad) in rec.inputs.iter().zip(input_grads) {
                if let Some(g) = grad {
                    debug_assert_eq!(g.len(), input.len());
                    if input.is_tracked() {
                        route(input, g);
                    }
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn backward_rejects_non_scalar() {
        let mut g = Graph::recording();
        let x = Tensor::param(&[3], vec![1.0, 2.0, 3.0]).unwrap();
        let y = g.relu(&x).unwrap();
        assert!(g.backward(&y).is_err());
    }

    #[test]
    fn fan_out_gradients_add() {
        // loss = sum(x) + sum(x) => grad = 2 everywhere
        let mut g = Graph::recording();
        let x = Tensor::param(&[4], vec![0.5; 4]).unwrap();
        let a = g.sum(&x).unwrap();
        let b = g.sum(&x).unwrap();
        let loss = g.add(&a, &b).unwrap();
        g.backward(&loss).unwrap();
        assert_eq!(x.grad().unwrap(), vec![2.0; 4]);
    }

    #[test]
    fn repeated_backward_accumulates() {
        let mut g = Graph::recording();
        let x = Tensor::param(&[2], vec![1.0, -1.0]).unwrap();
        let loss = g.sum(&x).unwrap();
        g.backward(&loss).unwrap();
        g.backward(&loss).unwrap();
        assert_eq!(x.grad().unwrap(), vec![2.0, 2.0]);
    }

    #[test]
    fn inference_graph_records_nothing() {
        let mut g = Graph::inference();
        let x = Tensor::param(&[2], vec![1.0, 2.0]).unwrap();
        let y = g.relu(&x).unwrap();
        assert_eq!(g.num_records(), 0);
        assert!(!y.is_tracked());
        assert!(g.backward(&y).is_err());
    }
}
