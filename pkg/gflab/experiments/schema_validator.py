# experiments/schema_validator.py
import json
import logging
from pathlib import Path
from typing import Any, Dict, List, Optional

from jsonschema import Draft7Validator, ValidationError

logger = logging.getLogger(__name__)

SCHEMA_DIR = Path(__file__).resolve().parent.parent / "schemas"


class SchemaValidator:
    """
    Validates scenario configs and run reports against JSON schemas

    Schemas:
    - config.schema.json
    - report.schema.json
    """

    def __init__(self, schema_dir: Path = SCHEMA_DIR):
        self.schema_dir = Path(schema_dir)
        self.schemas: Dict[str, Dict] = {}
        self._load_schemas()

    def _load_schemas(self):
        schema_files = {
            "config": "config.schema.json",
            "report": "report.schema.json",
        }
        for schema_name, filename in schema_files.items():
            schema_path = self.schema_dir / filename
            try:
                with open(schema_path, "r", encoding="utf-8") as f:
                    self.schemas[schema_name] = json.load(f)
                logger.debug(f"✅ Loaded schema: {schema_name}")
            except FileNotFoundError:
                logger.warning(f"⚠️  Schema not found: {schema_path}")
            except json.JSONDecodeError as e:
                logger.error(f"❌ Invalid JSON in {filename}: {e}")

    def config_errors(self, flat_config: Dict[str, Any]) -> List[ValidationError]:
        """All violations of the config schema, first failing key first."""
        return self._errors(flat_config, "config")

    def validate_report(self, report: Dict[str, Any]) -> bool:
        errors = self._errors(report, "report")
        for e in errors:
            logger.error(f"❌ Report validation failed at {list(e.absolute_path)}: {e.message}")
        return not errors

    def _errors(self, instance: Dict[str, Any], schema_name: str) -> List[ValidationError]:
        if schema_name not in self.schemas:
            raise RuntimeError(f"schema not loaded: {schema_name}")
        validator = Draft7Validator(self.schemas[schema_name])
        return sorted(validator.iter_errors(instance), key=lambda e: [str(p) for p in e.absolute_path])


# Global validator instance
_validator: Optional[SchemaValidator] = None


def get_validator() -> SchemaValidator:
    """Get or create global validator instance"""
    global _validator
    if _validator is None:
        _validator = SchemaValidator()
    return _validator
