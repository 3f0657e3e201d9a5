"""Directional relation schemas.

A schema of n relations yields 2n+1 class ids: each relation gets one
id per argument direction, and the last id is the no-relation class.
Relation i owns ids 2i for (e1,e2) and 2i+1 for (e2,e1).
"""

from __future__ import annotations

from dataclasses import dataclass, field

NO_RELATION = "no_relation"
DIRECTIONS = ("(e1,e2)", "(e2,e1)")

KBP37_RELATIONS = (
    "per:alternate_names",
    "per:origin",
    "per:spouse",
    "per:title",
    "per:employee_of",
    "per:countries_of_residence",
    "per:stateorprovinces_of_residence",
    "per:cities_of_residence",
    "per:country_of_birth",
    "org:alternate_names",
    "org:subsidiaries",
    "org:members",
    "org:top_members/employees",
    "org:founded",
    "org:founded_by",
    "org:country_of_headquarters",
    "org:stateorprovince_of_headquarters",
    "org:city_of_headquarters",
)


@dataclass(frozen=True)
class RelationSchema:
    """Maps directional labels like ``per:spouse(e1,e2)`` to class ids."""

    relations: tuple = ()
    _by_label: dict = field(init=False, repr=False, compare=False, default_factory=dict)

    def __post_init__(self):
        relations = tuple(self.relations)
        object.__setattr__(self, "relations", relations)
        if not relations:
            raise ValueError("schema needs at least one relation")
        if len(set(relations)) != len(relations):
            raise ValueError("duplicate relation names")
        by_label = {}
        for i, name in enumerate(relations):
            if not name or name == NO_RELATION:
                raise ValueError(f"bad relation name: {name!r}")
            by_label[f"{name}{DIRECTIONS[0]}"] = 2 * i
            by_label[f"{name}{DIRECTIONS[1]}"] = 2 * i + 1
        by_label[NO_RELATION] = 2 * len(relations)
        object.__setattr__(self, "_by_label", by_label)

    @property
    def num_relations(self) -> int:
        return len(self.relations)

    @property
    def num_classes(self) -> int:
        return 2 * len(self.relations) + 1

    @property
    def no_relation_id(self) -> int:
        return 2 * len(self.relations)

    @property
    def labels(self) -> tuple:
        return tuple(self._by_label)

    def class_id(self, label: str) -> int:
        try:
            return self._by_label[label]
        except KeyError:
            raise KeyError(f"unknown relation label: {label!r}") from None

    def label(self, class_id: int) -> str:
        if not 0 <= class_id < self.num_classes:
            raise IndexError(f"class id {class_id} out of range")
        if class_id == self.no_relation_id:
            return NO_RELATION
        return f"{self.relations[class_id // 2]}{DIRECTIONS[class_id % 2]}"

    def relation_of(self, class_id: int) -> tuple:
        """(relation name, direction index) or (None, None) for no_relation."""
        if not 0 <= class_id < self.num_classes:
            raise IndexError(f"class id {class_id} out of range")
        if class_id == self.no_relation_id:
            return None, None
        return self.relations[class_id // 2], class_id % 2

    def class_ids_of(self, relation: str) -> tuple:
        i = self.relations.index(relation)
        return 2 * i, 2 * i + 1

    def to_json_dict(self) -> dict:
        return {"relations": list(self.relations)}

    @classmethod
    def from_json_dict(cls, payload: dict) -> "RelationSchema":
        return cls(tuple(payload["relations"]))


def kbp37_schema() -> RelationSchema:
    """The 18-relation person/organization schema, 37 classes total."""
    return RelationSchema(KBP37_RELATIONS)
