"""JSON schema for dependency graph documents."""

MEU_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["start", "end", "text", "type", "source", "confidence"],
    "properties": {
        "start": {"type": "integer"},
        "end": {"type": "integer"},
        "text": {"type": "string"},
        "monad": {"type": "string"},
        "type": {"type": "string"},
        "source": {"type": "string"},
        "confidence": {"type": "number"},
    },
}

DEP_GRAPH_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "required": ["nodes", "edges"],
    "properties": {
        "text": {"type": "string"},
        "nodes": {
            "type": "array",
            "minItems": 1,
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["id", "name"],
                "properties": {
                    "id": {"type": "integer"},
                    "name": {"type": "string"},
                    "lemma": {"type": "string"},
                    "pos": {"type": "string"},
                    "type": {"type": "string"},
                    "min": {"type": "integer"},
                    "max": {"type": "integer"},
                    "properties": {
                        "type": "object",
                        "additionalProperties": {
                            "type": "array",
                            "items": {"type": "string"},
                        },
                    },
                },
            },
        },
        "edges": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["source", "target", "label"],
                "properties": {
                    "source": {"type": "integer"},
                    "target": {"type": "integer"},
                    "label": {"type": "string"},
                    "label_type": {"type": "string"},
                    "negated": {"type": "boolean"},
                },
            },
        },
        "meu": {"type": "array", "items": MEU_SCHEMA},
    },
}
