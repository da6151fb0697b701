from .app import starter
