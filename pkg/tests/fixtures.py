from pathlib import Path

from rdfstream.model import IRI, Literal, Transaction, add, remove

HERE = Path(__file__).parent / "fixtures"

TITLE_UPDATE_XML = (HERE / "title_update.xml").read_bytes()
TITLE_UPDATE_GRUF = (HERE / "title_update.gruf").read_text()

RESOURCE = IRI("http://example.org/things#resource1")
TITLE = IRI("http://purl.org/dc/terms/title")
TITLE_UPDATE = Transaction(
    (
        remove(RESOURCE, TITLE, Literal("Original Title")),
        add(RESOURCE, TITLE, Literal("New Title")),
    )
)
