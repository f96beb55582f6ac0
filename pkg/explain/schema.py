"""JSON schema for dataset documents."""

PAIR_LIST = {
    "type": "array",
    "items": {
        "type": "array",
        "items": {"type": "integer"},
        "minItems": 2,
        "maxItems": 2,
    },
}

DATASET_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "required": ["sentences", "expected_clusters"],
    "properties": {
        "name": {"type": "string"},
        "sentences": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["text"],
                "anyOf": [{"required": ["formula"]}, {"required": ["graph"]}],
                "properties": {
                    "text": {"type": "string"},
                    "formula": {"type": "string"},
                    "graph": {"type": "string"},
                },
            },
        },
        "expected_clusters": {
            "type": "array",
            "items": {"type": "array", "items": {"type": "integer"}, "minItems": 1},
        },
        "expected_pairs": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "IMPLICATION": PAIR_LIST,
                "INCONSISTENCY": PAIR_LIST,
                "INDIFFERENCE": PAIR_LIST,
            },
        },
    },
}
