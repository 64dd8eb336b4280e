//! JSON Schema for scenario files, as printed by `relrocket schema`.

use serde_json::{json, Value};

fn number() -> Value {
    json!({"type": "number"})
}

fn pair() -> Value {
    json!({"type": "array", "items": {"type": "number"}, "minItems": 2, "maxItems": 2})
}

fn controller(name: &str, properties: Value, required: &[&str]) -> Value {
    let mut props = properties;
    props["type"] = json!({"const": name});
    let mut req: Vec<&str> = vec!["type"];
    req.extend_from_slice(required);
    json!({
        "type": "object",
        "properties": props,
        "required": req,
        "additionalProperties": false
    })
}

pub fn scenario_schema() -> Value {
    let schedule = json!({
        "oneOf": [
            {
                "type": "object",
                "properties": {"kind": {"const": "constant"}, "value": number()},
                "required": ["kind", "value"],
                "additionalProperties": false
            },
            {
                "type": "object",
                "properties": {
                    "kind": {"const": "sine"},
                    "amplitude": number(),
                    "omega": number(),
                    "phase": number(),
                    "offset": number()
                },
                "required": ["kind", "amplitude", "omega"],
                "additionalProperties": false
            },
            {
                "type": "object",
                "properties": {
                    "kind": {"const": "steps"},
                    "steps": {"type": "array", "items": pair()}
                },
                "required": ["kind", "steps"],
                "additionalProperties": false
            }
        ]
    });
    json!({
        "$schema": "https://json-schema.org/draft/2020-12/schema",
        "title": "relrocket scenario",
        "type": "object",
        "properties": {
            "si_units": {"type": "boolean", "default": false, "description": "use c = 299792458 m/s unless params.c is set"},
            "params": {
                "type": "object",
                "properties": {
                    "m0": {"type": "number", "exclusiveMinimum": 0},
                    "vbar": {"type": "number", "exclusiveMinimum": 0, "description": "exhaust speed, at most c; defaults to c for the photon model"},
                    "c": {"type": "number", "exclusiveMinimum": 0, "description": "defaults to 1, or the SI value with si_units"},
                    "m_dry": {"type": "number", "minimum": 0, "default": 0},
                    "model": {"enum": ["classical", "relativistic", "photon"], "default": "relativistic"}
                },
                "required": ["m0"],
                "additionalProperties": false
            },
            "initial": {
                "type": "object",
                "properties": {
                    "p": {"type": "number", "default": 0},
                    "v": {"type": "number", "default": 0},
                    "m": {"type": "number", "exclusiveMinimum": 0, "description": "defaults to the mass consistent with v"}
                },
                "additionalProperties": false
            },
            "controller": {
                "oneOf": [
                    controller("state_feedback", json!({"poles": {"type": "array", "items": pair(), "minItems": 2, "maxItems": 2}, "gains": pair()}), &[]),
                    controller("output_feedback", json!({
                        "preset": {"enum": ["proportional", "proportional_derivative"]},
                        "kp": number(), "kd": number(), "reference": number()
                    }), &["preset", "kp"]),
                    controller("pid", json!({
                        "kp": number(), "ki": number(), "kd": number(),
                        "reference": number(), "reference_rate": number(),
                        "integral_limit": {"type": "number", "exclusiveMinimum": 0},
                        "compensation": {"enum": ["error_rate", "velocity"], "default": "error_rate"}
                    }), &["kp", "ki", "kd", "reference"]),
                    controller("open_loop", json!({
                        "schedule": schedule,
                        "channel": {"enum": ["virtual", "physical"], "default": "virtual"}
                    }), &["schedule"]),
                    controller("steering", json!({
                        "x0": pair(), "x_target": pair(),
                        "t0": {"const": 0}, "t_end": {"type": "number", "exclusiveMinimum": 0}
                    }), &["x_target", "t_end"]),
                    controller("coast", json!({}), &[])
                ]
            },
            "sim": {
                "type": "object",
                "properties": {
                    "dt": {"type": "number", "exclusiveMinimum": 0, "default": 1e-3},
                    "horizon": {"type": "number", "exclusiveMinimum": 0},
                    "mode": {"enum": ["ideal", "physical"], "default": "ideal"},
                    "abort_epsilon": {"type": "number", "exclusiveMinimum": 0, "maximum": 1e-6, "default": 1e-9},
                    "residual_tolerance": {"type": "number", "exclusiveMinimum": 0, "default": 1e-8},
                    "zoh_period": {"type": "number", "exclusiveMinimum": 0},
                    "target_tolerance": {"type": "number", "exclusiveMinimum": 0, "default": 1e-3}
                },
                "required": ["horizon"],
                "additionalProperties": false
            },
            "output": {
                "type": "object",
                "properties": {
                    "path": {"type": "string"},
                    "format": {"enum": ["csv", "json"], "default": "csv"}
                },
                "additionalProperties": false
            }
        },
        "required": ["params", "controller", "sim"],
        "additionalProperties": false
    })
}
