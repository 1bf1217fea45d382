#!/usr/bin/env python3
"""Generate benchmarks/mini.jsonl.

Each case is defined as a (before, after) code pair; the ground-truth
diff is rendered from the pair, so it always applies cleanly.  For
languages with a local toolchain the error message is captured by
actually compiling/running the broken code, and both sides of the pair
are verified (before fails, after succeeds).  Go messages are authored
in the toolchain's exact format since no Go compiler is assumed.

Usage: python3 scripts/make_benchmark.py [output-path]
"""

from __future__ import annotations

import json
import os
import subprocess
import sys
import tempfile
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from warp.context import BuildTool, Dependency, ProjectMetadata
from warp.diagnostics import LanguageId
from warp.diffs import format_diff, render_diff
from warp.evalharness import UnitTestSpec, load_benchmark
from warp.evalharness.dataset import BenchmarkInstance, instance_to_record
from warp.evalharness.sandbox import SOURCE_NAMES

TOOLCHAIN = {
    LanguageId.C: ("gcc", "-std=c11", "{src}", "-o", "prog"),
    LanguageId.CPP: ("g++", "-std=c++17", "{src}", "-o", "prog"),
    LanguageId.PYTHON: ("python3", "{src}"),
}


@dataclass
class Case:
    id: str
    language: LanguageId
    before: str
    after: str
    explanation: str
    urls: tuple[str, ...]
    message: Optional[str] = None  # None: capture from the toolchain
    unit_tests: Optional[UnitTestSpec] = None
    metadata: ProjectMetadata = ProjectMetadata()


STABLE_PROJECT_DIR = "/home/dev/project"


def run_case(case: Case, code: str) -> subprocess.CompletedProcess:
    argv = tuple(p.format(src=SOURCE_NAMES[case.language])
                 for p in TOOLCHAIN[case.language])
    with tempfile.TemporaryDirectory() as scratch:
        (Path(scratch) / SOURCE_NAMES[case.language]).write_text(code)
        proc = subprocess.run(argv, cwd=scratch, capture_output=True,
                              text=True, timeout=30,
                              env={**os.environ, "LC_ALL": "C"})
        # Interpreter tracebacks embed the scratch path; pin it so the
        # committed fixture is stable across regenerations.
        return subprocess.CompletedProcess(
            proc.args, proc.returncode, proc.stdout,
            proc.stderr.replace(str(Path(scratch).resolve()),
                                STABLE_PROJECT_DIR))


def capture_message(case: Case) -> str:
    if case.language not in TOOLCHAIN:
        raise SystemExit(f"{case.id}: no toolchain and no authored message")
    broken = run_case(case, case.before)
    if broken.returncode == 0:
        raise SystemExit(f"{case.id}: before-code unexpectedly succeeds")
    fixed = run_case(case, case.after)
    if fixed.returncode != 0:
        raise SystemExit(f"{case.id}: after-code fails:\n{fixed.stderr}")
    return broken.stderr


GO_HEADER = "# example.com/tool\n"

GO_META = ProjectMetadata(build_tool=BuildTool.GO_MOD, language_version="go1.21")


CASES = [
    Case(
        id="c-missing-semicolon",
        language=LanguageId.C,
        before=(
            "#include <stdio.h>\n"
            "\n"
            "int main(void) {\n"
            "    int total = 41 + 1\n"
            "    printf(\"total=%d\\n\", total);\n"
            "    return 0;\n"
            "}\n"),
        after=(
            "#include <stdio.h>\n"
            "\n"
            "int main(void) {\n"
            "    int total = 41 + 1;\n"
            "    printf(\"total=%d\\n\", total);\n"
            "    return 0;\n"
            "}\n"),
        explanation=(
            "The declaration of total on line 4 is missing its terminating "
            "semicolon, so the parser reads the next statement as part of "
            "the declaration. Adding the semicolon ends the statement."),
        urls=(
            "https://stackoverflow.com/questions/4449413",
            "https://en.cppreference.com/w/c/language/declarations",
        ),
        unit_tests=UnitTestSpec(command=("./prog",)),
    ),
    Case(
        id="c-undeclared-identifier",
        language=LanguageId.C,
        before=(
            "#include <stdio.h>\n"
            "\n"
            "int sum(int a, int b) {\n"
            "    return a + b;\n"
            "}\n"
            "\n"
            "int main(void) {\n"
            "    int first = 20;\n"
            "    int second = 22;\n"
            "    printf(\"%d\\n\", sum(first, secnd));\n"
            "    return 0;\n"
            "}\n"),
        after=(
            "#include <stdio.h>\n"
            "\n"
            "int sum(int a, int b) {\n"
            "    return a + b;\n"
            "}\n"
            "\n"
            "int main(void) {\n"
            "    int first = 20;\n"
            "    int second = 22;\n"
            "    printf(\"%d\\n\", sum(first, second));\n"
            "    return 0;\n"
            "}\n"),
        explanation=(
            "secnd is a typo for the local variable second, so the compiler "
            "reports an undeclared identifier. Using the declared name "
            "resolves it."),
        urls=(
            "https://stackoverflow.com/questions/8440816",
            "https://gcc.gnu.org/onlinedocs/gcc/Warning-Options.html",
        ),
    ),
    Case(
        id="c-conflicting-types",
        language=LanguageId.C,
        before=(
            "#include <stdio.h>\n"
            "\n"
            "double scale(double value);\n"
            "\n"
            "double scale(int value) {\n"
            "    return value * 2.0;\n"
            "}\n"
            "\n"
            "int main(void) {\n"
            "    printf(\"%.1f\\n\", scale(21.0));\n"
            "    return 0;\n"
            "}\n"),
        after=(
            "#include <stdio.h>\n"
            "\n"
            "double scale(double value);\n"
            "\n"
            "double scale(double value) {\n"
            "    return value * 2.0;\n"
            "}\n"
            "\n"
            "int main(void) {\n"
            "    printf(\"%.1f\\n\", scale(21.0));\n"
            "    return 0;\n"
            "}\n"),
        explanation=(
            "The definition of scale takes an int parameter while the "
            "earlier prototype declares a double parameter, so the two "
            "declarations conflict. Matching the definition to the "
            "prototype fixes the build."),
        urls=(
            "https://stackoverflow.com/questions/1549631",
        ),
    ),
    Case(
        id="c-too-many-args",
        language=LanguageId.C,
        before=(
            "#include <stdio.h>\n"
            "\n"
            "int add(int a, int b) {\n"
            "    return a + b;\n"
            "}\n"
            "\n"
            "int main(void) {\n"
            "    printf(\"%d\\n\", add(19, 20, 3));\n"
            "    return 0;\n"
            "}\n"),
        after=(
            "#include <stdio.h>\n"
            "\n"
            "int add(int a, int b) {\n"
            "    return a + b;\n"
            "}\n"
            "\n"
            "int main(void) {\n"
            "    printf(\"%d\\n\", add(19, 23));\n"
            "    return 0;\n"
            "}\n"),
        explanation=(
            "add is declared with two parameters but the call site passes "
            "three arguments. Collapsing the call to two arguments matches "
            "the declaration."),
        urls=(
            "https://stackoverflow.com/questions/13590749",
        ),
    ),
    Case(
        id="c-redefinition",
        language=LanguageId.C,
        before=(
            "#include <stdio.h>\n"
            "\n"
            "int limit(void) {\n"
            "    return 10;\n"
            "}\n"
            "\n"
            "int limit(void) {\n"
            "    return 20;\n"
            "}\n"
            "\n"
            "int main(void) {\n"
            "    printf(\"%d\\n\", limit());\n"
            "    return 0;\n"
            "}\n"),
        after=(
            "#include <stdio.h>\n"
            "\n"
            "int limit(void) {\n"
            "    return 10;\n"
            "}\n"
            "\n"
            "int main(void) {\n"
            "    printf(\"%d\\n\", limit());\n"
            "    return 0;\n"
            "}\n"),
        explanation=(
            "limit is defined twice in the same translation unit, which C "
            "forbids. Removing the duplicate definition leaves a single "
            "implementation."),
        urls=(
            "https://stackoverflow.com/questions/15590272",
        ),
    ),
    Case(
        id="c-unknown-type",
        language=LanguageId.C,
        before=(
            "#include <stdio.h>\n"
            "\n"
            "int main(void) {\n"
            "    strng name = \"warp\";\n"
            "    printf(\"%s\\n\", name);\n"
            "    return 0;\n"
            "}\n"),
        after=(
            "#include <stdio.h>\n"
            "\n"
            "int main(void) {\n"
            "    const char *name = \"warp\";\n"
            "    printf(\"%s\\n\", name);\n"
            "    return 0;\n"
            "}\n"),
        explanation=(
            "strng is not a type; C has no built-in string type. A string "
            "literal is held through a const char pointer."),
        urls=(
            "https://stackoverflow.com/questions/1887097",
            "https://en.cppreference.com/w/c/language/string_literal",
        ),
    ),
    Case(
        id="cpp-no-member",
        language=LanguageId.CPP,
        before=(
            "#include <iostream>\n"
            "#include <vector>\n"
            "\n"
            "int main() {\n"
            "    std::vector<int> values;\n"
            "    values.push_backx(3);\n"
            "    values.push_back(4);\n"
            "    std::cout << values.size() << \"\\n\";\n"
            "    return 0;\n"
            "}\n"),
        after=(
            "#include <iostream>\n"
            "#include <vector>\n"
            "\n"
            "int main() {\n"
            "    std::vector<int> values;\n"
            "    values.push_back(3);\n"
            "    values.push_back(4);\n"
            "    std::cout << values.size() << \"\\n\";\n"
            "    return 0;\n"
            "}\n"),
        explanation=(
            "std::vector has no member push_backx; the method is spelled "
            "push_back. The compiler's suggestion is correct."),
        urls=(
            "https://en.cppreference.com/w/cpp/container/vector/push_back",
            "https://stackoverflow.com/questions/42069696",
        ),
    ),
    Case(
        id="cpp-missing-semicolon-class",
        language=LanguageId.CPP,
        before=(
            "#include <iostream>\n"
            "\n"
            "class Point {\n"
            "public:\n"
            "    int x;\n"
            "    int y;\n"
            "}\n"
            "\n"
            "int main() {\n"
            "    Point p{3, 4};\n"
            "    std::cout << p.x + p.y << \"\\n\";\n"
            "    return 0;\n"
            "}\n"),
        after=(
            "#include <iostream>\n"
            "\n"
            "class Point {\n"
            "public:\n"
            "    int x;\n"
            "    int y;\n"
            "};\n"
            "\n"
            "int main() {\n"
            "    Point p{3, 4};\n"
            "    std::cout << p.x + p.y << \"\\n\";\n"
            "    return 0;\n"
            "}\n"),
        explanation=(
            "A class definition must end with a semicolon after the closing "
            "brace; without it the following function is parsed as part of "
            "the declaration."),
        urls=(
            "https://stackoverflow.com/questions/15376211",
        ),
    ),
    Case(
        id="cpp-missing-include-iostream",
        language=LanguageId.CPP,
        before=(
            "#include <string>\n"
            "\n"
            "int main() {\n"
            "    std::string greeting = \"hello\";\n"
            "    std::cout << greeting << \"\\n\";\n"
            "    return 0;\n"
            "}\n"),
        after=(
            "#include <iostream>\n"
            "#include <string>\n"
            "\n"
            "int main() {\n"
            "    std::string greeting = \"hello\";\n"
            "    std::cout << greeting << \"\\n\";\n"
            "    return 0;\n"
            "}\n"),
        explanation=(
            "std::cout lives in <iostream>, which this file never includes. "
            "Adding the include brings the declaration into scope."),
        urls=(
            "https://en.cppreference.com/w/cpp/io/cout",
            "https://stackoverflow.com/questions/10863871",
        ),
    ),
    Case(
        id="py-name-error",
        language=LanguageId.PYTHON,
        before=(
            "def main():\n"
            "    total = 40 + 2\n"
            "    print(totl)\n"
            "\n"
            "\n"
            "if __name__ == \"__main__\":\n"
            "    main()\n"),
        after=(
            "def main():\n"
            "    total = 40 + 2\n"
            "    print(totl)\n"
            "\n"
            "\n"
            "if __name__ == \"__main__\":\n"
            "    main()\n").replace("print(totl)", "print(total)"),
        explanation=(
            "totl is an undefined name; the local variable is spelled "
            "total. Printing the correct name fixes the NameError."),
        urls=(
            "https://docs.python.org/3/library/exceptions.html#NameError",
            "https://stackoverflow.com/questions/14804084",
        ),
    ),
    Case(
        id="py-type-concat",
        language=LanguageId.PYTHON,
        before=(
            "def describe(count):\n"
            "    return \"items: \" + count\n"
            "\n"
            "\n"
            "def main():\n"
            "    print(describe(3))\n"
            "\n"
            "\n"
            "if __name__ == \"__main__\":\n"
            "    main()\n"),
        after=(
            "def describe(count):\n"
            "    return \"items: \" + str(count)\n"
            "\n"
            "\n"
            "def main():\n"
            "    print(describe(3))\n"
            "\n"
            "\n"
            "if __name__ == \"__main__\":\n"
            "    main()\n"),
        explanation=(
            "Python does not concatenate str and int implicitly; count "
            "must be converted with str() before joining it to the label."),
        urls=(
            "https://stackoverflow.com/questions/25675943",
            "https://docs.python.org/3/library/stdtypes.html#str",
        ),
        unit_tests=UnitTestSpec(
            command=("python3", "test_main.py"),
            files={"test_main.py": (
                "from main import describe\n"
                "\n"
                "assert describe(3) == \"items: 3\"\n"
                "print(\"ok\")\n")},
        ),
    ),
    Case(
        id="py-module-not-found",
        language=LanguageId.PYTHON,
        before=(
            "import jsn\n"
            "\n"
            "\n"
            "def main():\n"
            "    print(jsn.dumps({\"status\": \"ok\"}))\n"
            "\n"
            "\n"
            "if __name__ == \"__main__\":\n"
            "    main()\n"),
        after=(
            "import json\n"
            "\n"
            "\n"
            "def main():\n"
            "    print(json.dumps({\"status\": \"ok\"}))\n"
            "\n"
            "\n"
            "if __name__ == \"__main__\":\n"
            "    main()\n"),
        explanation=(
            "jsn is a misspelling of the standard-library module json, so "
            "the import fails at startup. Correcting the module name at "
            "the import and call site fixes it."),
        urls=(
            "https://docs.python.org/3/library/json.html",
            "https://stackoverflow.com/questions/16981921",
        ),
    ),
    Case(
        id="py-syntax-for-colon",
        language=LanguageId.PYTHON,
        before=(
            "def main():\n"
            "    values = [3, 5, 8]\n"
            "    total = 0\n"
            "    for value in values\n"
            "        total += value\n"
            "    print(total)\n"
            "\n"
            "\n"
            "if __name__ == \"__main__\":\n"
            "    main()\n"),
        after=(
            "def main():\n"
            "    values = [3, 5, 8]\n"
            "    total = 0\n"
            "    for value in values:\n"
            "        total += value\n"
            "    print(total)\n"
            "\n"
            "\n"
            "if __name__ == \"__main__\":\n"
            "    main()\n"),
        explanation=(
            "A for statement header must end with a colon; without it the "
            "parser stops at the end of the line. Adding the colon fixes "
            "the SyntaxError."),
        urls=(
            "https://docs.python.org/3/reference/compound_stmts.html#for",
            "https://stackoverflow.com/questions/10239668",
        ),
    ),
    Case(
        id="py-key-error",
        language=LanguageId.PYTHON,
        before=(
            "CONFIG = {\"name\": \"warp\", \"mode\": \"fast\"}\n"
            "\n"
            "\n"
            "def main():\n"
            "    print(CONFIG[\"model\"])\n"
            "\n"
            "\n"
            "if __name__ == \"__main__\":\n"
            "    main()\n"),
        after=(
            "CONFIG = {\"name\": \"warp\", \"mode\": \"fast\"}\n"
            "\n"
            "\n"
            "def main():\n"
            "    print(CONFIG[\"mode\"])\n"
            "\n"
            "\n"
            "if __name__ == \"__main__\":\n"
            "    main()\n"),
        explanation=(
            "The dictionary has a mode key, not model; indexing with the "
            "misspelled key raises KeyError. Using the existing key fixes "
            "the lookup."),
        urls=(
            "https://docs.python.org/3/library/stdtypes.html#dict",
            "https://stackoverflow.com/questions/10116518",
        ),
    ),
    Case(
        id="py-attribute-error",
        language=LanguageId.PYTHON,
        before=(
            "def collect(items):\n"
            "    seen = []\n"
            "    for item in items:\n"
            "        seen.add(item)\n"
            "    return seen\n"
            "\n"
            "\n"
            "def main():\n"
            "    print(collect([\"a\", \"b\"]))\n"
            "\n"
            "\n"
            "if __name__ == \"__main__\":\n"
            "    main()\n"),
        after=(
            "def collect(items):\n"
            "    seen = []\n"
            "    for item in items:\n"
            "        seen.append(item)\n"
            "    return seen\n"
            "\n"
            "\n"
            "def main():\n"
            "    print(collect([\"a\", \"b\"]))\n"
            "\n"
            "\n"
            "if __name__ == \"__main__\":\n"
            "    main()\n"),
        explanation=(
            "Lists grow with append; add is a set method, so calling it on "
            "a list raises AttributeError. Switching to append keeps the "
            "list semantics."),
        urls=(
            "https://docs.python.org/3/tutorial/datastructures.html",
            "https://stackoverflow.com/questions/2703310",
        ),
        unit_tests=UnitTestSpec(
            command=("python3", "test_main.py"),
            files={"test_main.py": (
                "from main import collect\n"
                "\n"
                "assert collect([\"a\", \"b\"]) == [\"a\", \"b\"]\n"
                "print(\"ok\")\n")},
        ),
    ),
    Case(
        id="go-undefined-println",
        language=LanguageId.GO,
        before=(
            "package main\n"
            "\n"
            "import \"fmt\"\n"
            "\n"
            "func main() {\n"
            "\tanswer := 42\n"
            "\tfmt.Printl(\"answer:\", answer)\n"
            "}\n"),
        after=(
            "package main\n"
            "\n"
            "import \"fmt\"\n"
            "\n"
            "func main() {\n"
            "\tanswer := 42\n"
            "\tfmt.Println(\"answer:\", answer)\n"
            "}\n"),
        explanation=(
            "The fmt package exports Println, not Printl; the undefined "
            "reference fails the build. Correcting the function name "
            "fixes it."),
        urls=(
            "https://pkg.go.dev/fmt#Println",
            "https://stackoverflow.com/questions/24069470",
        ),
        message=GO_HEADER + "./main.go:7:2: undefined: fmt.Printl\n",
        metadata=GO_META,
    ),
    Case(
        id="go-declared-not-used",
        language=LanguageId.GO,
        before=(
            "package main\n"
            "\n"
            "import \"fmt\"\n"
            "\n"
            "func main() {\n"
            "\tcount := 3\n"
            "\tfmt.Println(\"ready\")\n"
            "}\n"),
        after=(
            "package main\n"
            "\n"
            "import \"fmt\"\n"
            "\n"
            "func main() {\n"
            "\tcount := 3\n"
            "\tfmt.Println(\"ready\", count)\n"
            "}\n"),
        explanation=(
            "Go rejects unused local variables; count is assigned but "
            "never read. Printing it uses the value and clears the error."),
        urls=(
            "https://go.dev/ref/spec#Declarations_and_scope",
            "https://stackoverflow.com/questions/21743841",
        ),
        message=GO_HEADER + "./main.go:6:2: declared and not used: count\n",
        metadata=GO_META,
    ),
    Case(
        id="go-imported-not-used",
        language=LanguageId.GO,
        before=(
            "package main\n"
            "\n"
            "import (\n"
            "\t\"fmt\"\n"
            "\t\"os\"\n"
            ")\n"
            "\n"
            "func main() {\n"
            "\tfmt.Println(\"starting\")\n"
            "}\n"),
        after=(
            "package main\n"
            "\n"
            "import (\n"
            "\t\"fmt\"\n"
            ")\n"
            "\n"
            "func main() {\n"
            "\tfmt.Println(\"starting\")\n"
            "}\n"),
        explanation=(
            "The os package is imported but nothing in the file uses it, "
            "which Go treats as an error. Removing the unused import "
            "fixes the build."),
        urls=(
            "https://go.dev/ref/spec#Import_declarations",
            "https://stackoverflow.com/questions/21220077",
        ),
        message=GO_HEADER + "./main.go:5:2: imported and not used: \"os\"\n",
        metadata=GO_META,
    ),
    Case(
        id="go-missing-return",
        language=LanguageId.GO,
        before=(
            "package main\n"
            "\n"
            "import \"fmt\"\n"
            "\n"
            "func double(value int) int {\n"
            "\tif value > 0 {\n"
            "\t\treturn value * 2\n"
            "\t}\n"
            "}\n"
            "\n"
            "func main() {\n"
            "\tfmt.Println(double(21))\n"
            "}\n"),
        after=(
            "package main\n"
            "\n"
            "import \"fmt\"\n"
            "\n"
            "func double(value int) int {\n"
            "\tif value > 0 {\n"
            "\t\treturn value * 2\n"
            "\t}\n"
            "\treturn 0\n"
            "}\n"
            "\n"
            "func main() {\n"
            "\tfmt.Println(double(21))\n"
            "}\n"),
        explanation=(
            "double only returns inside the if branch, so the fall-through "
            "path ends the function without a value. Adding a final return "
            "covers every path."),
        urls=(
            "https://go.dev/ref/spec#Terminating_statements",
            "https://stackoverflow.com/questions/41425511",
        ),
        message=GO_HEADER + "./main.go:9:1: missing return\n",
        metadata=GO_META,
    ),
    Case(
        id="go-type-mismatch",
        language=LanguageId.GO,
        before=(
            "package main\n"
            "\n"
            "import \"fmt\"\n"
            "\n"
            "func main() {\n"
            "\tvar limit int = \"100\"\n"
            "\tfmt.Println(limit)\n"
            "}\n"),
        after=(
            "package main\n"
            "\n"
            "import \"fmt\"\n"
            "\n"
            "func main() {\n"
            "\tvar limit int = 100\n"
            "\tfmt.Println(limit)\n"
            "}\n"),
        explanation=(
            "limit is declared as int but initialized with a string "
            "literal. Using a numeric literal matches the declared type."),
        urls=(
            "https://go.dev/ref/spec#Assignability",
            "https://stackoverflow.com/questions/62376408",
        ),
        message=(GO_HEADER + "./main.go:6:18: cannot use \"100\" (untyped "
                 "string constant) as int value in variable declaration\n"),
        metadata=GO_META,
    ),
]


def build_instance(case: Case) -> BenchmarkInstance:
    message = case.message if case.message is not None else capture_message(case)
    diff = render_diff(case.before, case.after,
                       SOURCE_NAMES[case.language])
    return BenchmarkInstance(
        id=case.id,
        language=case.language,
        erroneous_code=case.before,
        error_message=message,
        project_context=case.metadata,
        ground_truth_diff=diff,
        reference_explanation=case.explanation,
        verified_urls=case.urls,
        unit_tests=case.unit_tests,
    )


def main() -> None:
    out_path = Path(sys.argv[1]) if len(sys.argv) > 1 else (
        Path(__file__).resolve().parent.parent / "benchmarks" / "mini.jsonl")
    instances = [build_instance(case) for case in CASES]
    out_path.parent.mkdir(parents=True, exist_ok=True)
    with out_path.open("w", encoding="utf-8") as handle:
        for instance in instances:
            record = instance_to_record(instance)
            assert format_diff(instance.ground_truth_diff) == record["ground_truth_diff"]
            handle.write(json.dumps(record, sort_keys=True) + "\n")

    loaded = load_benchmark(out_path)
    if loaded.errors:
        raise SystemExit(f"validation errors: {[str(e) for e in loaded.errors]}")
    print(f"wrote {len(loaded.instances)} instances to {out_path}")


if __name__ == "__main__":
    main()
