# Generated migration

from django.db import migrations, models
import django.utils.timezone
import uuid


class Migration(migrations.Migration):

    initial = True

    dependencies = [
    ]

    operations = [
        migrations.CreateModel(
            name='CorpusSnapshot',
            fields=[
                ('id', models.UUIDField(default=uuid.uuid4, editable=False, primary_key=True, serialize=False)),
                ('kind', models.CharField(choices=[('sl', 'SL dataset'), ('squad', 'SQuAD2.0 QA corpus')], db_index=True, max_length=20)),
                ('name', models.CharField(db_index=True, max_length=200)),
                ('path', models.CharField(help_text='Where the file was last seen', max_length=1000)),
                ('content_hash', models.CharField(db_index=True, help_text='SHA256 of the file bytes', max_length=64)),
                ('record_count', models.PositiveIntegerField(help_text='Turns (sl) or QA examples (squad)')),
                ('created_by', models.CharField(help_text='Command that produced or read it', max_length=100)),
                ('metadata', models.JSONField(blank=True, default=dict)),
                ('created_at', models.DateTimeField(db_index=True, default=django.utils.timezone.now)),
            ],
            options={
                'db_table': 'corpus_snapshot',
                'ordering': ['-created_at'],
            },
        ),
        migrations.AddConstraint(
            model_name='corpussnapshot',
            constraint=models.UniqueConstraint(fields=('kind', 'content_hash'), name='unique_corpus_snapshot'),
        ),
    ]
