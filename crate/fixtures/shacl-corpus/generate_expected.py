"""Regenerates expected.json by validating every case with pyshacl.

Usage: python generate_expected.py  (needs pyshacl and rdflib)

Closed shapes get `sh:ignoredProperties (rdf:type)` added before pyshacl
sees them, because the engine under test always permits rdf:type on
closed shapes. Each case records `conforms` and the constraint components
reported on the case's root instances; a violation inside a nested
`sh:node` value counts as `node` on the root.
"""

import json
from pathlib import Path

from pyshacl import validate
from rdflib import BNode, Graph, Namespace, URIRef
from rdflib.collection import Collection
from rdflib.namespace import RDF

SH = Namespace("http://www.w3.org/ns/shacl#")
HERE = Path(__file__).resolve().parent
SHAPES = HERE.parent / "shapes" / "domain.ttl"


def load_shapes():
    g = Graph().parse(SHAPES, format="turtle")
    for shape in list(g.subjects(SH.closed, None)):
        head = BNode()
        Collection(g, head, [RDF.type])
        g.add((shape, SH.ignoredProperties, head))
    return g


def component_name(iri):
    local = str(iri).removeprefix(str(SH)).removesuffix("ConstraintComponent")
    return local[0].lower() + local[1:]


def main():
    shapes = load_shapes()
    targets = set(shapes.objects(None, SH.targetClass))
    expected = {}
    for case in sorted(HERE.glob("*.ttl")):
        data = Graph().parse(case, format="turtle")
        roots = {s for s, o in data.subject_objects(RDF.type) if o in targets and isinstance(s, URIRef)}
        conforms, report, _ = validate(data, shacl_graph=shapes, inference="none")
        components = set()
        for result in report.subjects(RDF.type, SH.ValidationResult):
            focus = report.value(result, SH.focusNode)
            if focus in roots:
                components.add(component_name(report.value(result, SH.sourceConstraintComponent)))
        expected[case.stem] = {"conforms": bool(conforms), "components": sorted(components)}
    (HERE / "expected.json").write_text(json.dumps(expected, indent=2, ensure_ascii=False) + "\n")


if __name__ == "__main__":
    main()
