"""Runtime verification of the hypotheses behind each certificate.

Audits observe sampled evaluations and count violations with worst
margins; they never alter numerics. A certificate is only issued when
every linked record is clean, and the experiment exit status reflects
that gating. A pass is evidence over the sampled points, not a proof,
and the report schema says so.
"""

from dataclasses import dataclass, field


@dataclass
class AuditRecord:
    hypothesis_id: str
    description: str
    checked: int = 0
    violations: int = 0
    worst_margin: float = float("inf")   # min over checks of (value - floor)

    def update(self, checked, violations, worst_margin):
        self.checked += int(checked)
        self.violations += int(violations)
        self.worst_margin = min(self.worst_margin, float(worst_margin))

    @property
    def passed(self):
        return self.violations == 0

    def to_dict(self):
        return {
            "hypothesis": self.hypothesis_id,
            "description": self.description,
            "checked": self.checked,
            "violations": self.violations,
            "worst_margin": self.worst_margin,
            "passed": self.passed,
            "evidence": "sampled evaluations, not a proof",
        }


@dataclass
class AuditSet:
    records: dict = field(default_factory=dict)

    def record(self, hypothesis_id, description):
        if hypothesis_id not in self.records:
            self.records[hypothesis_id] = AuditRecord(hypothesis_id, description)
        return self.records[hypothesis_id]

    @property
    def all_passed(self):
        return all(r.passed for r in self.records.values())

    def to_list(self):
        return [self.records[k].to_dict() for k in sorted(self.records)]
