"""YAML-related functions."""

import io
import logging
from pathlib import Path
from types import NoneType, UnionType
from typing import Any, Literal, Union, get_args, get_origin

from pydantic import BaseModel
from pydantic_core import PydanticUndefined
from ruamel.yaml import YAML
from ruamel.yaml.comments import CommentedMap
from ruamel.yaml.error import YAMLError

logger = logging.getLogger(__name__)


def load_yaml(file: Path) -> Any:
    """Load a yaml file and return its contents.

    An empty file gives an empty dictionary.

    Parameters
    ----------
    file : Path
        YAML file.

    Returns
    -------
    Any
        The contents of the yaml file.

    Raises
    ------
    FileNotFoundError
        If the file does not exist.
    YAMLError
        If the file is not valid YAML.
    """
    yaml = YAML(typ="safe")
    try:
        with file.open(encoding="utf-8") as f:
            conf = yaml.load(f)
    except YAMLError as e:
        logger.error("Error parsing the file '%s': %s", file, str(e))
        raise
    except FileNotFoundError as e:
        logger.error("File '%s' was not found: %s", file, str(e))
        raise

    return {} if conf is None else conf


def _type_name(annotation: Any) -> str:
    """Readable name of a field annotation, used in template comments.

    Examples
    --------
    >>> _type_name(int | None)
    'int | None'
    >>> _type_name(Literal["hann", "hamming"])
    'hann, hamming'
    >>> _type_name(dict[str, float])
    'dict[str, float]'
    """
    origin = get_origin(annotation)
    if origin is Literal:
        return ", ".join(map(str, get_args(annotation)))
    if origin in {Union, UnionType}:
        return " | ".join(_type_name(arg) for arg in get_args(annotation))
    if origin in {dict, list, set, tuple, frozenset}:
        inner = ", ".join(_type_name(arg) for arg in get_args(annotation))
        return f"{origin.__name__}[{inner}]"
    if annotation is NoneType:
        return "None"
    return str(getattr(annotation, "__name__", annotation))


def _yaml_value(value: Any) -> Any:
    if isinstance(value, (set, frozenset)):
        return sorted(value)
    if isinstance(value, tuple):
        return list(value)
    return value


def generate_yaml_template(model: type[BaseModel]) -> str:
    """Generate a YAML template from a Pydantic model.

    Every field is written with its default value (empty when required) and an end of line
    comment with its type and description. Nested models become nested mappings.

    Parameters
    ----------
    model : type[BaseModel]
        The Pydantic model to generate a YAML template from.

    Returns
    -------
    str
        The YAML template as a string.

    Examples
    --------
    >>> from pydantic import BaseModel, Field
    >>> class Window(BaseModel):
    ...     frame_ms: float = Field(32.0, description="Frame length")
    ...     window: Literal["hann", "hamming"] = Field("hann", description="Shape")
    >>> class Options(BaseModel):
    ...     seed: int = Field(..., description="Random seed")
    ...     stft: Window = Window()
    >>> print(generate_yaml_template(Options))  # doctest: +NORMALIZE_WHITESPACE
    seed: # [int] Random seed
    stft:
        frame_ms: 32.0 # [float] Frame length
        window: hann # [hann, hamming] Shape
    <BLANKLINE>
    """
    yaml = YAML()
    yaml.indent(mapping=4, sequence=4, offset=2)

    def generate_template(model: type[BaseModel]) -> CommentedMap:
        template = CommentedMap()
        for name, field in model.model_fields.items():
            annotation = field.annotation
            if isinstance(annotation, type) and issubclass(annotation, BaseModel):
                template[name] = generate_template(annotation)
                continue

            default_value = field.default
            if default_value is PydanticUndefined:
                default_value = None
            template[name] = _yaml_value(default_value)
            template.yaml_add_eol_comment(
                f"[{_type_name(annotation)}] {field.description or ''}".rstrip(), key=name
            )
        return template

    stream = io.StringIO()
    yaml.dump(generate_template(model), stream)
    return stream.getvalue()
