"""
Pipeline documents and reports
==============================

The command line tool reads a JSON document and prints a report.  The same
thing can be done from Python with ``robba.cli.run``.  Changing one expected
value makes exactly one check fail.
"""
from robba.cli import run
from robba.fixtures import corpus
from robba.serialize import dumps

doc = next(d for d in corpus() if d["name"] == "unitroot_lang_two")
print(dumps({k: doc[k] for k in ("task", "inputs", "options", "expect")}))

rep = run(doc).to_json()
print("status:", rep["status"], " values:", rep["values"])

doc["expect"]["m"] = "3"
rep = run(doc).to_json()
print("after editing the expectation:", rep["status"])
print("failing checks:", [c["name"] for c in rep["checks"] if not c["pass"]])
