import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'symrad.settings')
django.setup()
