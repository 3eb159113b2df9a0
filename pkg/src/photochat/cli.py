"""Command-line entry points: simulation runner and service launcher."""

from __future__ import annotations

import argparse
import os
import sys
from pathlib import Path

from .errors import PhotoChatError, ValidationError
from .llm import DEFAULT_PERSONA_PROMPT, PersonaConfig, RemoteConfig, RemoteProvider, ScriptedProvider
from .sim import emit_report, load_persona_fixture, load_photo_fixture, load_user_fixture, run_simulation


def build_provider(spec: str):
    """Provider specs: ``remote`` or ``scripted:<path>``."""
    if spec == "remote":
        return RemoteProvider(RemoteConfig.from_env())
    if spec.startswith("scripted:"):
        path = spec.split(":", 1)[1]
        if not Path(path).is_file():
            raise ValidationError(f"script file not found: {path}", code="FIXTURE_INVALID")
        return ScriptedProvider.from_file(path)
    raise ValidationError(
        f"unknown provider spec {spec!r}; use 'remote' or 'scripted:<path>'",
        code="FIXTURE_INVALID",
    )


def sim_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="photochat-sim",
        description="Run a chatbot-vs-persona simulation or a scripted replay.",
    )
    parser.add_argument("--user", required=True, help="user fixture (JSON)")
    parser.add_argument("--photo", required=True, help="photo fixture (JSON)")
    parser.add_argument("--persona", help="persona fixture (JSON); defaults to the built-in persona")
    parser.add_argument(
        "--chatbot-provider", default="remote", help="'remote' or 'scripted:<path>'"
    )
    parser.add_argument(
        "--persona-provider", default="remote", help="'remote' or 'scripted:<path>'"
    )
    parser.add_argument("--max-rounds", type=int, help="override the persona's round budget")
    parser.add_argument("--format", choices=("text", "json"), default="text")
    parser.add_argument("--out", help="write the report here instead of stdout")
    parser.add_argument(
        "--start-time", type=int, default=0, help="logical clock for summary timestamps"
    )
    args = parser.parse_args(argv)

    try:
        user = load_user_fixture(args.user)
        photo, plan_items = load_photo_fixture(args.photo, owner=user.user_id)
        if args.persona:
            persona = load_persona_fixture(args.persona)
        else:
            persona = PersonaConfig(persona_prompt=DEFAULT_PERSONA_PROMPT)
        if args.max_rounds is not None:
            persona.max_rounds = args.max_rounds
        persona.validate()

        report = run_simulation(
            user,
            photo,
            persona,
            build_provider(args.chatbot_provider),
            build_provider(args.persona_provider),
            plan_items=plan_items,
            start_time=args.start_time,
        )
    except PhotoChatError as exc:
        print(f"error [{exc.code}]: {exc}", file=sys.stderr)
        return 1

    rendered = emit_report(report, args.format)
    if args.out:
        Path(args.out).write_text(rendered, encoding="utf-8")
    else:
        sys.stdout.write(rendered)

    if report.constraint_violations:
        print(
            f"error: {report.constraint_violations} option-constraint violations",
            file=sys.stderr,
        )
        return 2
    return 0


def serve_main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="photochat-serve", description="Run the REST service."
    )
    parser.add_argument(
        "--listen",
        default=os.environ.get("LISTEN_ADDR", "127.0.0.1:8000"),
        help="host:port (or set LISTEN_ADDR)",
    )
    args = parser.parse_args(argv)

    import uvicorn

    from .service import create_app_from_env

    host, _, port = args.listen.rpartition(":")
    uvicorn.run(create_app_from_env(), host=host or "127.0.0.1", port=int(port))
    return 0


if __name__ == "__main__":  # pragma: no cover
    sys.exit(sim_main())
