"""
Tests for catequiv.exceptions module and the command exit codes.
"""

from __future__ import annotations

from django.test import SimpleTestCase

from catequiv.exceptions import (
    CatEquivError,
    CheckpointError,
    ConfigError,
    DataError,
    ShapeError,
    SymmetryError,
    TrainingError,
    VerificationError,
)
from catequiv.management.base import exit_code_for


class CatEquivErrorTests(SimpleTestCase):
    def test_is_exception(self) -> None:
        """Should be an Exception subclass."""
        self.assertIsInstance(CatEquivError("boom"), Exception)

    def test_attributes(self) -> None:
        """Should store code, message, and context."""
        error = DataError(code="missing_file", message="Arquivo ausente", context={"path": "x.txt"})
        self.assertEqual(error.code, "missing_file")
        self.assertEqual(error.message, "Arquivo ausente")
        self.assertEqual(error.context, {"path": "x.txt"})
        self.assertEqual(str(error), "Arquivo ausente")

    def test_default_context(self) -> None:
        """Should default context to empty dict."""
        self.assertEqual(ShapeError(code="even_kernel", message="x").context, {})

    def test_subclasses(self) -> None:
        """Every domain error derives from CatEquivError."""
        for cls in (ShapeError, SymmetryError, DataError, ConfigError, TrainingError, CheckpointError, VerificationError):
            self.assertTrue(issubclass(cls, CatEquivError))


class ExitCodeTests(SimpleTestCase):
    def test_mapping(self) -> None:
        """Usage 1, data/checkpoint/training 2, verification 3."""
        cases = {
            ConfigError: 1,
            ShapeError: 1,
            SymmetryError: 1,
            DataError: 2,
            CheckpointError: 2,
            TrainingError: 2,
            VerificationError: 3,
            CatEquivError: 1,
        }
        for cls, code in cases.items():
            self.assertEqual(exit_code_for(cls(code="x", message="y")), code, msg=cls.__name__)
