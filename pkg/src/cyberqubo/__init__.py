"""QUBO-based cyber-risk scoring on layered infrastructure graphs."""

from .encoding import DecodeResult, ScoreEncoding, decode, encode, onehot_penalty_terms, repair
from .netmodel import (EdgeSpec, ExceptionSpec, GraphValidationError, InfrastructureGraph, LayeredGenSpec,
                       LayerSpec, NodeSpec, amplify_node_influence, generate_layered, it255_spec, load_graph,
                       save_graph, scaled_spec, to_dot)
from .qubo import QuboModel, Weights, assemble, export_qubo, import_qubo

__version__ = "0.1.0"
