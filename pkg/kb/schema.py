"""JSON schema for the knowledge base document."""

PATTERN_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "required": ["name", "args"],
    "properties": {
        "name": {"type": "string", "minLength": 1},
        "negated": {"type": "boolean"},
        "args": {
            "type": "array",
            "minItems": 1,
            "maxItems": 2,
            "items": {"type": ["string", "null"]},
        },
        "properties": {
            "type": "object",
            "additionalProperties": {"type": "string"},
        },
    },
}

KB_SCHEMA = {
    "$schema": "http://json-schema.org/draft-07/schema#",
    "type": "object",
    "additionalProperties": False,
    "required": ["lexicon", "rewrite_rules", "functions", "relations", "expansions"],
    "properties": {
        "lexicon": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["lemma", "entity_class"],
                "properties": {
                    "lemma": {"type": "string"},
                    "surface_forms": {"type": "array", "items": {"type": "string"}},
                    "entity_class": {"type": "string"},
                    "abstract_entity": {"type": "boolean"},
                    "transitive": {"type": ["boolean", "null"]},
                    "semi_modal": {"type": "boolean"},
                    "verb_class": {"type": ["string", "null"]},
                },
            },
        },
        "rewrite_rules": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["rule_order", "construct_name", "construct_property"],
                "properties": {
                    "rule_order": {"type": "integer"},
                    "prepositions": {"type": "array", "items": {"type": "string"}},
                    "matched_by_source": {"type": ["string", "null"]},
                    "requires_abstract_entity": {"type": ["boolean", "null"]},
                    "requires_verb_class": {"type": ["string", "null"]},
                    "construct_name": {"type": "string"},
                    "construct_property": {"type": "string"},
                },
            },
        },
        "functions": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": [
                    "construct_name",
                    "construct_property",
                    "attach_to",
                    "argument",
                ],
                "properties": {
                    "construct_name": {"type": "string"},
                    "construct_property": {"type": "string"},
                    "attach_to": {"type": "string"},
                    "argument": {"type": "string"},
                },
            },
        },
        "relations": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["kind", "left", "right"],
                "properties": {
                    "kind": {"type": "string"},
                    "left": {"type": "string"},
                    "right": {"type": "string"},
                },
            },
        },
        "expansions": {
            "type": "array",
            "items": {
                "type": "object",
                "additionalProperties": False,
                "required": ["mode", "pattern", "rewrite"],
                "properties": {
                    "mode": {"type": "string"},
                    "pattern": PATTERN_SCHEMA,
                    "rewrite": PATTERN_SCHEMA,
                },
            },
        },
        "prototypical_prepositions": {"type": "array", "items": {"type": "string"}},
        "pronouns": {"type": "array", "items": {"type": "string"}},
        "phrasal_verbs": {"type": "array", "items": {"type": "string"}},
    },
}
