from .metadata import RunMetadata, package_versions

__all__ = ["RunMetadata", "package_versions"]
