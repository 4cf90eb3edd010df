//! OpenAPI description of the HTTP API.

use serde_json::{json, Value};

fn body(schema: &str) -> Value {
    json!({
        "required": true,
        "content": { "application/json": { "schema": { "$ref": format!("#/components/schemas/{schema}") } } }
    })
}

fn ok(schema: &str) -> Value {
    json!({
        "description": "OK",
        "content": { "application/json": { "schema": { "$ref": format!("#/components/schemas/{schema}") } } }
    })
}

fn error(description: &str) -> Value {
    json!({
        "description": description,
        "content": { "application/json": { "schema": { "$ref": "#/components/schemas/Error" } } }
    })
}

fn session_op(summary: &str, request: &str, response: &str) -> Value {
    json!({
        "post": {
            "summary": summary,
            "parameters": [{ "$ref": "#/components/parameters/SessionId" }],
            "requestBody": body(request),
            "responses": {
                "200": ok(response),
                "400": error("Validation failure, zero-probability conditioning, non-identifiable query or infeasible recourse"),
                "404": error("Unknown session"),
                "422": error("Variable or value not in the session schema")
            }
        }
    })
}

const LABEL: &str = r##"{"oneOf": [{"type": "string"}, {"type": "number"}]}"##;

/// The document served at `/v1/openapi`.
pub fn document() -> Value {
    let label: Value = serde_json::from_str(LABEL).expect("static schema");
    let assignment = json!({ "type": "object", "additionalProperties": label });
    let event = json!({
        "type": "object",
        "additionalProperties": { "oneOf": [label, { "type": "array", "items": label }] }
    });
    let source = |inline: Value| {
        json!({ "oneOf": [
            inline,
            { "type": "object", "required": ["path"], "properties": { "path": { "type": "string", "description": "Relative to the server's data directory" } }, "additionalProperties": false }
        ] })
    };
    json!({
        "openapi": "3.0.3",
        "info": {
            "title": "causal-explain",
            "version": env!("CARGO_PKG_VERSION"),
            "description": "Necessity and sufficiency scores, explanations and recourse for a black-box decision algorithm. Every response carries an `x-elapsed-ms` header."
        },
        "servers": [{ "url": "/v1" }],
        "paths": {
            "/openapi": { "get": { "summary": "This document", "responses": { "200": { "description": "OpenAPI document" } } } },
            "/sessions": {
                "get": { "summary": "List sessions", "responses": { "200": ok("SessionList") } },
                "post": {
                    "summary": "Load a graph, dataset and black box",
                    "requestBody": body("SessionRequest"),
                    "responses": {
                        "201": ok("SessionCreated"),
                        "400": error("Invalid bundle"),
                        "422": error("Bundle references unknown variables or values")
                    }
                }
            },
            "/sessions/{id}/schema": {
                "get": {
                    "summary": "Variables, edges and outcome of a session",
                    "parameters": [{ "$ref": "#/components/parameters/SessionId" }],
                    "responses": { "200": ok("Schema"), "404": error("Unknown session") }
                }
            },
            "/sessions/{id}/scores": session_op("Scores or bounds for one query", "ScoresRequest", "ScoreReport"),
            "/sessions/{id}/explain/global": session_op("Per-attribute scores over the whole population", "ExplainRequest", "ExplanationReport"),
            "/sessions/{id}/explain/contextual": session_op("Per-attribute scores within a context", "ExplainRequest", "ExplanationReport"),
            "/sessions/{id}/explain/local": session_op("Contributions of one individual's values", "ExplainRequest", "ExplanationReport"),
            "/sessions/{id}/recourse": session_op("Least-cost actions reaching a sufficiency level", "RecourseRequest", "RecoursePlan"),
            "/sessions/{id}/whatif": session_op("Prediction and sufficiency after overriding values", "WhatIfRequest", "WhatIf")
        },
        "components": {
            "parameters": {
                "SessionId": { "name": "id", "in": "path", "required": true, "schema": { "type": "string" } }
            },
            "schemas": {
                "Label": label,
                "Assignment": assignment,
                "Event": event,
                "Error": {
                    "type": "object",
                    "required": ["code", "message"],
                    "properties": {
                        "code": { "type": "string", "enum": ["VALIDATION", "CONDITIONING_ON_NULL", "NOT_IDENTIFIABLE", "INFEASIBLE", "SCHEMA_MISMATCH", "LIMIT_EXCEEDED", "BLACKBOX_FAILURE", "NOT_FOUND", "IO"] },
                        "message": { "type": "string" },
                        "plan": { "$ref": "#/components/schemas/RecoursePlan" },
                        "path": { "type": "array", "items": { "type": "string" } }
                    }
                },
                "Graph": {
                    "type": "object",
                    "required": ["variables"],
                    "properties": {
                        "variables": { "type": "array", "items": {
                            "type": "object",
                            "required": ["name", "domain"],
                            "properties": {
                                "name": { "type": "string" },
                                "domain": { "type": "array", "items": label },
                                "ordered": { "type": "boolean" }
                            }
                        } },
                        "edges": { "type": "array", "items": { "type": "array", "items": { "type": "string" }, "minItems": 2, "maxItems": 2 } }
                    }
                },
                "Outcome": {
                    "type": "object",
                    "required": ["name", "threshold"],
                    "properties": {
                        "name": { "type": "string" },
                        "domain": { "type": "array", "items": label },
                        "order": { "type": "array", "items": label, "description": "Most desirable first" },
                        "threshold": label
                    }
                },
                "Model": {
                    "type": "object",
                    "required": ["kind", "outcome"],
                    "properties": {
                        "kind": { "type": "string", "enum": ["expr", "logistic", "process", "column"] },
                        "inputs": { "type": "array", "items": { "type": "string" } },
                        "outcome": { "$ref": "#/components/schemas/Outcome" },
                        "expr": { "type": "string" },
                        "intercept": { "type": "number" },
                        "weights": { "type": "object" },
                        "cutoff": { "type": "number" },
                        "command": { "type": "array", "items": { "type": "string" } },
                        "timeout_secs": { "type": "number" }
                    }
                },
                "SessionConfig": {
                    "type": "object",
                    "properties": {
                        "smoothing": { "type": "number", "minimum": 0 },
                        "zero_mass_policy": { "type": "string", "enum": ["error", "skip_and_renormalize"] },
                        "binning": { "type": "object", "additionalProperties": { "type": "array", "items": { "type": "number" } } }
                    }
                },
                "SessionRequest": {
                    "type": "object",
                    "required": ["graph", "dataset", "blackbox"],
                    "properties": {
                        "graph": source(json!({ "$ref": "#/components/schemas/Graph" })),
                        "dataset": source(json!({ "type": "string", "description": "CSV text" })),
                        "blackbox": source(json!({ "$ref": "#/components/schemas/Model" })),
                        "config": { "$ref": "#/components/schemas/SessionConfig" }
                    }
                },
                "SessionCreated": {
                    "type": "object",
                    "required": ["id"],
                    "properties": { "id": { "type": "string" }, "created_at": { "type": "integer" } }
                },
                "SessionList": { "type": "array", "items": { "$ref": "#/components/schemas/SessionCreated" } },
                "Schema": {
                    "type": "object",
                    "properties": {
                        "id": { "type": "string" },
                        "created_at": { "type": "integer" },
                        "variables": { "$ref": "#/components/schemas/Graph/properties/variables" },
                        "edges": { "$ref": "#/components/schemas/Graph/properties/edges" },
                        "outcome": { "$ref": "#/components/schemas/Outcome" },
                        "positive": { "type": "array", "items": { "type": "string" } },
                        "inputs": { "type": "array", "items": { "type": "string" } },
                        "input_proxy": { "type": "boolean" },
                        "rows": { "type": "integer" },
                        "total_weight": { "type": "number" },
                        "config": { "$ref": "#/components/schemas/SessionConfig" }
                    }
                },
                "Query": {
                    "type": "object",
                    "required": ["x", "x_prime"],
                    "properties": {
                        "x": { "$ref": "#/components/schemas/Assignment" },
                        "x_prime": { "$ref": "#/components/schemas/Assignment" },
                        "context": { "$ref": "#/components/schemas/Event" },
                        "threshold": label
                    }
                },
                "ScoresRequest": {
                    "type": "object",
                    "required": ["query"],
                    "properties": {
                        "query": { "$ref": "#/components/schemas/Query" },
                        "mode": { "type": "string", "enum": ["point", "bounds", "naive"] },
                        "adjustment": { "type": "array", "items": { "type": "string" } }
                    }
                },
                "Triple": {
                    "type": "object",
                    "properties": { "nec": { "type": "number" }, "suf": { "type": "number" }, "nesuf": { "type": "number" } }
                },
                "ScoreReport": {
                    "type": "object",
                    "properties": {
                        "query": { "$ref": "#/components/schemas/Query" },
                        "outcome": { "type": "string" },
                        "positive": { "type": "array", "items": { "type": "string" } },
                        "mode": { "type": "string" },
                        "scores": { "$ref": "#/components/schemas/Triple" },
                        "bounds": { "type": "object" },
                        "diagnostics": { "type": "object" }
                    }
                },
                "ExplainRequest": {
                    "type": "object",
                    "properties": {
                        "score": { "type": "string", "enum": ["nec", "suf", "nesuf"] },
                        "mode": { "type": "string", "enum": ["point", "bounds", "naive"] },
                        "order": { "type": "string", "enum": ["infer", "declared", "declared_if_ordered"] },
                        "overrides": { "type": "object", "additionalProperties": { "type": "array", "items": label } },
                        "context": { "$ref": "#/components/schemas/Event" },
                        "attribute": { "type": "string" },
                        "individual": { "$ref": "#/components/schemas/Assignment" }
                    }
                },
                "ExplanationReport": {
                    "type": "object",
                    "properties": {
                        "level": { "type": "string", "enum": ["global", "contextual", "local"] },
                        "score": { "type": "string" },
                        "mode": { "type": "string" },
                        "outcome": { "type": "string" },
                        "positive": { "type": "array", "items": { "type": "string" } },
                        "context": { "$ref": "#/components/schemas/Event" },
                        "individual": { "$ref": "#/components/schemas/Assignment" },
                        "prediction": { "type": "string" },
                        "entries": { "type": "array", "items": { "type": "object" } },
                        "estimator": { "type": "object" }
                    }
                },
                "RecourseConfig": {
                    "type": "object",
                    "required": ["actionable", "alpha"],
                    "properties": {
                        "actionable": { "type": "array", "items": { "type": "string" } },
                        "alpha": { "type": "number", "exclusiveMinimum": true, "minimum": 0, "maximum": 1 },
                        "costs": { "type": "object", "additionalProperties": { "type": "string" } },
                        "node_limit": { "type": "integer" },
                        "timeout_ms": { "type": "integer" }
                    }
                },
                "RecourseRequest": {
                    "type": "object",
                    "required": ["individual", "config"],
                    "properties": {
                        "individual": { "$ref": "#/components/schemas/Assignment" },
                        "config": { "$ref": "#/components/schemas/RecourseConfig" }
                    }
                },
                "RecoursePlan": {
                    "type": "object",
                    "properties": {
                        "feasible": { "type": "boolean" },
                        "cost": { "type": "number" },
                        "changes": { "type": "array", "items": {
                            "type": "object",
                            "properties": {
                                "attribute": { "type": "string" },
                                "from": { "type": "string" },
                                "to": { "type": "string" },
                                "cost": { "type": "number" }
                            }
                        } },
                        "assignment": { "type": "object", "additionalProperties": { "type": "string" } },
                        "probability": { "type": "number" },
                        "sufficiency": { "type": "number" },
                        "alpha": { "type": "number" },
                        "context": { "$ref": "#/components/schemas/Event" },
                        "constraint": { "type": "object" },
                        "constraint_count": { "type": "integer" },
                        "nodes_explored": { "type": "integer" }
                    }
                },
                "WhatIfRequest": {
                    "type": "object",
                    "required": ["individual"],
                    "properties": {
                        "individual": { "$ref": "#/components/schemas/Assignment" },
                        "overrides": { "$ref": "#/components/schemas/Assignment" }
                    }
                },
                "WhatIf": {
                    "type": "object",
                    "properties": {
                        "original": { "type": "object", "additionalProperties": { "type": "string" } },
                        "modified": { "type": "object", "additionalProperties": { "type": "string" } },
                        "prediction": { "type": "string" },
                        "original_prediction": { "type": "string" },
                        "sufficiency": { "type": "number", "nullable": true },
                        "original_sufficiency": { "type": "number", "nullable": true },
                        "sufficiency_delta": { "type": "number" }
                    }
                }
            }
        }
    })
}
